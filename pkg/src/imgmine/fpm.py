"""FP-tree construction, top-down maximal frequent itemset mining, class rules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .segment import CLASS_ITEMS, ITEM_CLASSES, TransactionDB, coarse_item


class FPNode:
    __slots__ = ("name", "count", "parent", "children", "link", "_path_items")

    def __init__(self, name, parent=None):
        self.name = name
        self.count = 0
        self.parent = parent
        self.children = {}  # item -> FPNode, insertion-ordered
        self.link = None
        self._path_items = None

    def path_items(self):
        """Frozenset of items on the root-ward path, excluding this node's own item."""
        if self._path_items is None:
            items = set()
            node = self.parent
            while node is not None and node.name is not None:
                items.add(node.name)
                node = node.parent
            self._path_items = frozenset(items)
        return self._path_items


class HeaderEntry:
    __slots__ = ("item", "support", "head", "_tail")

    def __init__(self, item, support):
        self.item = item
        self.support = support
        self.head = None
        self._tail = None

    def append(self, node):
        if self.head is None:
            self.head = node
        else:
            self._tail.link = node
        self._tail = node

    def chain(self):
        node = self.head
        while node is not None:
            yield node
            node = node.link


class FPTree:
    """Prefix tree over support-ordered filtered transactions with a header table."""

    def __init__(self, header_order):
        self.root = FPNode(None)
        self.header = [HeaderEntry(item, sup) for item, sup in header_order]
        self.rank = {item: i for i, (item, _) in enumerate(header_order)}
        self.entries = {e.item: e for e in self.header}
        self.n_transactions = 0

    def insert(self, items):
        """Insert one transaction already filtered and sorted in header order."""
        self.n_transactions += 1
        node = self.root
        for item in items:
            child = node.children.get(item)
            if child is None:
                child = FPNode(item, parent=node)
                node.children[item] = child
                self.entries[item].append(child)
            child.count += 1
            node = child


def frequent_items(db: TransactionDB, minsup_count: int):
    """Items with support >= minsup_count, by descending support then ascending code."""
    if minsup_count < 1:
        raise ValueError("minsup_count must be >= 1")
    counts = {}
    for t in db.transactions:
        for item in t.items:
            counts[item] = counts.get(item, 0) + 1
    frequent = [(item, sup) for item, sup in counts.items() if sup >= minsup_count]
    frequent.sort(key=lambda pair: (-pair[1], pair[0]))
    return frequent


def build_fp_tree(db: TransactionDB, L) -> FPTree:
    """Second scan: filter each transaction to L, reorder by L, insert into the tree."""
    tree = FPTree(L)
    for t in db.transactions:
        filtered = sorted((i for i in t.items if i in tree.rank), key=tree.rank.get)
        tree.insert(filtered)
    return tree


def itemset_support(tree: FPTree, itemset) -> int:
    """Support via the node-link chain of the itemset's least frequent item."""
    items = frozenset(itemset)
    if not items:
        return tree.n_transactions
    if any(i not in tree.rank for i in items):
        return 0
    anchor = max(items, key=lambda i: tree.rank[i])
    rest = items - {anchor}
    return sum(
        node.count for node in tree.entries[anchor].chain() if rest <= node.path_items()
    )


def _path_seeds(tree: FPTree):
    """Item sets of all root-to-leaf paths; every transaction is a prefix of one."""
    seeds = set()
    stack = [(tree.root, frozenset())]
    while stack:
        node, items = stack.pop()
        if node.name is not None:
            items = items | {node.name}
        if node.children:
            for child in node.children.values():
                stack.append((child, items))
        elif items:
            seeds.add(items)
    return seeds


def mine_mfi(tree: FPTree, L, minsup_count: int):
    """Top-down maximal frequent itemset search over the candidate frontier.

    The frontier starts from the tree's root-to-leaf path itemsets (any
    frequent itemset lies inside some transaction, hence inside some path);
    an infrequent candidate is expanded into its (k-1)-subsets, and anything
    covered by an accepted maximal set is pruned. Candidates are processed
    largest first so acceptance implies maximality.
    """
    items = [item for item, _ in L]
    if not items:
        return set()
    mfi = []
    support_cache = {}

    def support(s):
        v = support_cache.get(s)
        if v is None:
            v = itemset_support(tree, s)
            support_cache[s] = v
        return v

    frontier = {}
    for seed in _path_seeds(tree):
        frontier.setdefault(len(seed), set()).add(seed)
    size = max(frontier, default=0)
    while size > 0:
        candidates = sorted(frontier.pop(size, ()), key=sorted)
        for cand in candidates:
            if any(cand <= m for m in mfi):
                continue
            if support(cand) >= minsup_count:
                mfi.append(cand)
            elif size > 1:
                bucket = frontier.setdefault(size - 1, set())
                for item in cand:
                    sub = cand - {item}
                    if not any(sub <= m for m in mfi):
                        bucket.add(sub)
        size -= 1
    return set(mfi)


def frequent_closure(mfi, tree: FPTree):
    """Expand maximal sets into the complete frequent family with supports."""
    seen = {}
    for m in mfi:
        items = sorted(m)
        n = len(items)
        for mask in range(1, 1 << n):
            s = frozenset(items[i] for i in range(n) if mask >> i & 1)
            if s not in seen:
                seen[s] = itemset_support(tree, s)
    return sorted(seen.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))


@dataclass(frozen=True)
class AssociationRule:
    antecedent: tuple  # sorted feature item codes, non-empty
    consequent: str  # class label
    support: Fraction  # fraction of |D|
    confidence: Fraction


def with_class_items(db: TransactionDB) -> TransactionDB:
    """Append each labeled transaction's reserved class item; drop unlabeled rows."""
    from .segment import Transaction

    rows = [
        Transaction(tid=t.tid, items=t.items + (CLASS_ITEMS[t.label],), label=t.label)
        for t in db.transactions
        if t.label is not None
    ]
    return TransactionDB(transactions=rows)


def coarse_collapsed(db: TransactionDB) -> TransactionDB:
    """Hierarchy level 1: replace fine feature codes with their coarse parents."""
    from .segment import Transaction

    rows = [
        Transaction(
            tid=t.tid, items=tuple({coarse_item(i) for i in t.items}), label=t.label
        )
        for t in db.transactions
    ]
    return TransactionDB(transactions=rows)


def mine_frequent_family(db: TransactionDB, minsup_count: int):
    """Frequent-item list, FP-tree, MFI and the expanded frequent family in one go."""
    L = frequent_items(db, minsup_count)
    tree = build_fp_tree(db, L)
    mfi = mine_mfi(tree, L, minsup_count)
    return L, tree, mfi, frequent_closure(mfi, tree)


def generate_rules(freq, db: TransactionDB, minsup: Fraction, minconf: Fraction):
    """Class association rules X -> c from a frequent family containing class items."""
    n = len(db)
    if n == 0 or all(t.label is None for t in db.transactions):
        raise ValueError("rule generation requires a labeled transaction database")
    supports = dict(freq)
    class_items = set(CLASS_ITEMS.values())
    rules = []
    for itemset, sup in freq:
        present = itemset & class_items
        if len(present) != 1:
            continue
        c = next(iter(present))
        antecedent = itemset - {c}
        if not antecedent:
            continue
        sup_frac = Fraction(sup, n)
        if sup_frac < minsup:
            continue
        base = supports.get(antecedent)
        if base is None or base == 0:
            continue
        conf = Fraction(sup, base)
        if conf >= minconf:
            rules.append(
                AssociationRule(
                    antecedent=tuple(sorted(antecedent)),
                    consequent=ITEM_CLASSES[c],
                    support=sup_frac,
                    confidence=conf,
                )
            )
    rules.sort(key=lambda r: (-r.confidence, -r.support, r.antecedent))
    return rules


def minsup_fraction_to_count(minsup: Fraction, n_transactions: int) -> int:
    """Convert a fractional minimum support to a transaction count (ceiling)."""
    return max(1, math.ceil(minsup * n_transactions))


def mine_class_rules(db: TransactionDB, minsup, minconf, levels: int = 2):
    """Mine rules at the fine level and (optionally) the coarse-collapsed level.

    Returns (rules, mfi_per_level) where mfi_per_level maps level -> set of
    frozensets (level 2 = fine codes, level 1 = coarse codes).
    """
    minsup = Fraction(minsup).limit_denominator(10**9)
    minconf = Fraction(minconf).limit_denominator(10**9)
    labeled = with_class_items(db)
    count = minsup_fraction_to_count(minsup, len(labeled))
    mfi_per_level = {}
    merged = {}
    level_dbs = {2: labeled}
    if levels >= 2:
        level_dbs[1] = coarse_collapsed(labeled)
    for level in sorted(level_dbs, reverse=True):
        ldb = level_dbs[level]
        _, _, mfi, freq = mine_frequent_family(ldb, count)
        mfi_per_level[level] = mfi
        for rule in generate_rules(freq, ldb, minsup, minconf):
            key = (rule.antecedent, rule.consequent)
            prev = merged.get(key)
            if prev is None or rule.confidence > prev.confidence:
                merged[key] = rule
    rules = sorted(merged.values(), key=lambda r: (-r.confidence, -r.support, r.antecedent))
    return rules, mfi_per_level


def rules_to_csv(rules) -> bytes:
    lines = ["antecedent,class,support,confidence"]
    for r in rules:
        lines.append(
            f"{';'.join(str(i) for i in r.antecedent)},{r.consequent},"
            f"{float(r.support):.6f},{float(r.confidence):.6f}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")
