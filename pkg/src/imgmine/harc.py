"""Hybrid classifier: mined class rules become boolean attributes for an
information-gain decision tree over transactions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .fpm import AssociationRule, mine_class_rules
from .segment import CLASSES, QuantizationModel, Transaction, TransactionDB, coarse_item

MODEL_VERSION = "harc-1"
DEFAULT_ATTRIBUTE_CAP = 64


class ModelError(ValueError):
    """Model persistence / compatibility failure."""


@dataclass(frozen=True)
class RuleAttribute:
    """Boolean test: does the rule's antecedent fall inside a transaction's items?"""

    antecedent: tuple
    rule: AssociationRule

    def matches(self, items) -> bool:
        return set(self.antecedent) <= set(items)


@dataclass(frozen=True)
class Leaf:
    label: str
    distribution: dict  # class -> record count at this leaf


@dataclass(frozen=True)
class Split:
    attribute: int  # index into the model's attribute list
    on_true: "Leaf | Split"
    on_false: "Leaf | Split"


@dataclass
class HarcModel:
    rules: list
    attributes: list
    tree: "Leaf | Split"
    quantization: QuantizationModel
    default_class: str
    min_area: int = 25


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a class-count vector."""
    counts = [c for c in class_counts if c > 0]
    total = sum(counts)
    if total <= 0:
        raise ValueError("entropy undefined for an empty record set")
    return -sum((c / total) * math.log2(c / total) for c in counts)


def _class_counts(records):
    counts = {}
    for _, label in records:
        counts[label] = counts.get(label, 0) + 1
    return counts


def _majority(counts) -> str:
    order = {c: i for i, c in enumerate(CLASSES)}
    return max(sorted(counts, key=lambda c: order.get(c, 99)), key=counts.get)


def gain(records, attr: RuleAttribute) -> float:
    """Information gain of partitioning records by the attribute's truth value."""
    if not records:
        raise ValueError("gain undefined for an empty record set")
    total = len(records)
    parts = {True: [], False: []}
    for items, label in records:
        parts[attr.matches(items)].append(label)
    g = entropy(_class_counts(records).values())
    for labels in parts.values():
        if labels:
            counts = {}
            for lab in labels:
                counts[lab] = counts.get(lab, 0) + 1
            g -= (len(labels) / total) * entropy(counts.values())
    return g


def induce_tree(records, attrs, attr_indices=None) -> "Leaf | Split":
    """ID3-style induction over boolean rule attributes.

    records: list of (item set, class label). Attributes never repeat along a
    path; empty branches become leaves carrying the parent's majority class.
    """
    if not records:
        raise ValueError("cannot induce a tree from zero records")
    if attr_indices is None:
        attr_indices = list(range(len(attrs)))
    counts = _class_counts(records)
    majority = _majority(counts)
    if len(counts) == 1 or not attr_indices:
        return Leaf(label=majority, distribution=counts)
    best_idx, best_gain = None, -1.0
    for idx in attr_indices:
        g = gain(records, attrs[idx])
        if g > best_gain + 1e-12:  # ties keep the earliest attribute
            best_idx, best_gain = idx, g
    if best_gain <= 1e-12:
        return Leaf(label=majority, distribution=counts)
    attr = attrs[best_idx]
    true_part = [r for r in records if attr.matches(r[0])]
    false_part = [r for r in records if not attr.matches(r[0])]
    remaining = [i for i in attr_indices if i != best_idx]

    def branch(part):
        if not part:
            return Leaf(label=majority, distribution={majority: 0})
        return induce_tree(part, attrs, remaining)

    return Split(attribute=best_idx, on_true=branch(true_part), on_false=branch(false_part))


def _augmented_items(t: Transaction):
    """Transaction items plus their coarse-level parents, for rule matching."""
    items = set(t.items)
    items |= {coarse_item(i) for i in items}
    return items


def classify(model: HarcModel, t: Transaction):
    """Walk the tree; returns (predicted class, list of fired rule attributes)."""
    items = _augmented_items(t)
    fired = []
    node = model.tree
    while isinstance(node, Split):
        attr = model.attributes[node.attribute]
        if attr.matches(items):
            fired.append(attr)
            node = node.on_true
        else:
            node = node.on_false
    return node.label, fired


def train(
    db: TransactionDB,
    minsup=Fraction(1, 10),
    minconf=Fraction(97, 100),
    attribute_cap: int = DEFAULT_ATTRIBUTE_CAP,
    quantization: Optional[QuantizationModel] = None,
    min_area: int = 25,
) -> HarcModel:
    """Mine class rules, build rule attributes, induce the decision tree."""
    labeled = [t for t in db.transactions if t.label is not None]
    if not labeled:
        raise ValueError("training requires labeled transactions")
    classes = {t.label for t in labeled}
    if len(classes) < 2:
        raise ValueError("training requires at least two classes")
    rules, _ = mine_class_rules(db, minsup, minconf)

    attrs = []
    seen = set()
    for rule in rules:  # already confidence-sorted; first wins on duplicates
        if rule.antecedent not in seen:
            seen.add(rule.antecedent)
            attrs.append(RuleAttribute(antecedent=rule.antecedent, rule=rule))
        if len(attrs) >= attribute_cap:
            break

    records = [(_augmented_items(t), t.label) for t in labeled]
    default = _majority(_class_counts(records))
    if attrs:
        tree = induce_tree(records, attrs)
    else:
        tree = Leaf(label=default, distribution=_class_counts(records))
    return HarcModel(
        rules=rules,
        attributes=attrs,
        tree=tree,
        quantization=quantization or QuantizationModel(),
        default_class=default,
        min_area=min_area,
    )


def _tree_to_dict(node):
    if isinstance(node, Leaf):
        return {"leaf": node.label, "distribution": dict(sorted(node.distribution.items()))}
    return {
        "attribute": node.attribute,
        "true": _tree_to_dict(node.on_true),
        "false": _tree_to_dict(node.on_false),
    }


def _tree_from_dict(d):
    if "leaf" in d:
        return Leaf(label=d["leaf"], distribution=dict(d["distribution"]))
    return Split(
        attribute=int(d["attribute"]),
        on_true=_tree_from_dict(d["true"]),
        on_false=_tree_from_dict(d["false"]),
    )


def model_to_json(model: HarcModel) -> bytes:
    doc = {
        "version": MODEL_VERSION,
        "default_class": model.default_class,
        "min_area": model.min_area,
        "quantization": model.quantization.to_dict(),
        "rules": [
            {
                "antecedent": list(r.antecedent),
                "class": r.consequent,
                "support": [r.support.numerator, r.support.denominator],
                "confidence": [r.confidence.numerator, r.confidence.denominator],
            }
            for r in model.rules
        ],
        "attributes": [list(a.antecedent) for a in model.attributes],
        "tree": _tree_to_dict(model.tree),
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def model_from_json(data: bytes) -> HarcModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelError(f"unreadable model: {exc}") from None
    if doc.get("version") != MODEL_VERSION:
        raise ModelError(f"model version {doc.get('version')!r} != {MODEL_VERSION}")
    rules = [
        AssociationRule(
            antecedent=tuple(r["antecedent"]),
            consequent=r["class"],
            support=Fraction(*r["support"]),
            confidence=Fraction(*r["confidence"]),
        )
        for r in doc["rules"]
    ]
    by_antecedent = {r.antecedent: r for r in rules}
    attributes = [
        RuleAttribute(antecedent=tuple(a), rule=by_antecedent[tuple(a)])
        for a in doc["attributes"]
    ]
    return HarcModel(
        rules=rules,
        attributes=attributes,
        tree=_tree_from_dict(doc["tree"]),
        quantization=QuantizationModel.from_dict(doc["quantization"]),
        default_class=doc["default_class"],
        min_area=int(doc.get("min_area", 25)),
    )
