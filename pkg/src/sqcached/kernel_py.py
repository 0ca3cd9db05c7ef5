"""Pure-Python hot kernels: value ordering, LIKE matching, and the B-tree.

sqcached.kernel prefers the compiled twin (sqcached._ckernel) and falls back
to this module; both expose the identical API and must stay behaviourally
interchangeable (tests/test_kernel_btree.py runs against both).

Cell values are plain Python objects: None (null), int, float, str (text),
bytes (blob). Keys handed to BTree are either bare ints (row stores) or
tuples of cell values (secondary indexes, rowid last).
"""

BACKEND = "python"

_RANK = {bool: 1, int: 1, float: 1, str: 2, bytes: 3}


def compare_values(a, b):
    """Total order over cell values: null < numeric < text < blob.

    Numerics compare by value across int/float; str and bytes compare
    lexicographically, shorter-prefix-first. Returns -1, 0 or 1.
    """
    if a is None:
        return 0 if b is None else -1
    if b is None:
        return 1
    ra = _RANK[type(a)]
    rb = _RANK[type(b)]
    if ra != rb:
        return -1 if ra < rb else 1
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def compare_keys(a, b):
    """Order over B-tree keys: bare ints or tuples of cell values."""
    if type(a) is int and type(b) is int:
        if a < b:
            return -1
        return 1 if a > b else 0
    if type(a) is tuple and type(b) is tuple:
        for xa, xb in zip(a, b):
            c = compare_values(xa, xb)
            if c:
                return c
        la, lb = len(a), len(b)
        if la < lb:
            return -1
        return 1 if la > lb else 0
    return compare_values(a, b)


def compare_prefix(key, bound):
    """Like compare_keys but a shorter tuple bound matches any extension.

    Used for range scans: bound (v,) is "equal" to every key (v, *rest),
    so inclusive scans over a key prefix fall out naturally.
    """
    if type(key) is tuple and type(bound) is tuple:
        for xa, xb in zip(key, bound):
            c = compare_values(xa, xb)
            if c:
                return c
        return 0
    return compare_keys(key, bound)


def like_match(pattern, subject):
    """SQL LIKE: % matches any run, _ exactly one character.

    ASCII-case-insensitive; non-text or null subjects never match.
    """
    if type(subject) is not str:
        return False
    p, s = pattern, subject
    np, ns = len(p), len(s)
    i = j = 0
    star = -1
    mark = 0
    while i < ns:
        if j < np:
            pc = p[j]
            if pc == "%":
                star = j
                mark = i
                j += 1
                continue
            if pc == "_" or _fold(pc) == _fold(s[i]):
                i += 1
                j += 1
                continue
        if star >= 0:
            mark += 1
            i = mark
            j = star + 1
            continue
        return False
    while j < np and p[j] == "%":
        j += 1
    return j == np


def _fold(ch):
    o = ord(ch)
    if 65 <= o <= 90:
        return chr(o + 32)
    return ch


class _Leaf:
    __slots__ = ("keys", "vals", "next")

    def __init__(self):
        self.keys = []
        self.vals = []
        self.next = None


class _Inner:
    __slots__ = ("keys", "children")

    def __init__(self):
        self.keys = []
        self.children = []


def _find(keys, key):
    """Binary search by compare_keys; returns (position, found)."""
    lo, hi = 0, len(keys)
    while lo < hi:
        mid = (lo + hi) // 2
        c = compare_keys(keys[mid], key)
        if c < 0:
            lo = mid + 1
        elif c > 0:
            hi = mid
        else:
            return mid, True
    return lo, False


def _route(keys, key):
    """Child index for exact-key descent: keys equal to a separator live right."""
    lo, hi = 0, len(keys)
    while lo < hi:
        mid = (lo + hi) // 2
        if compare_keys(keys[mid], key) <= 0:
            lo = mid + 1
        else:
            hi = mid
    return lo


class BTree:
    """B+ tree: payloads in leaves, separator keys in inner nodes.

    Branching factor B bounds children per inner node; every node holds at
    most B-1 keys and every non-root node at least ceil(B/2)-1. Leaves sit
    at uniform depth and are chained for range scans. Keys are unique.
    """

    def __init__(self, branching=64):
        if branching < 4:
            raise ValueError("branching factor must be >= 4")
        self.branching = branching
        self._min_keys = (branching + 1) // 2 - 1
        self._root = _Leaf()
        self._size = 0

    def __len__(self):
        return self._size

    @property
    def depth(self):
        d = 1
        node = self._root
        while type(node) is _Inner:
            node = node.children[0]
            d += 1
        return d

    def get(self, key, default=None):
        node = self._root
        while type(node) is _Inner:
            node = node.children[_route(node.keys, key)]
        pos, found = _find(node.keys, key)
        return node.vals[pos] if found else default

    def contains(self, key):
        sentinel = object()
        return self.get(key, sentinel) is not sentinel

    def insert(self, key, value):
        path = []
        node = self._root
        while type(node) is _Inner:
            idx = _route(node.keys, key)
            path.append((node, idx))
            node = node.children[idx]
        pos, found = _find(node.keys, key)
        if found:
            raise KeyError("duplicate key")
        node.keys.insert(pos, key)
        node.vals.insert(pos, value)
        self._size += 1
        # split overflowing nodes bottom-up
        while len(node.keys) >= self.branching:
            mid = self.branching // 2
            if type(node) is _Leaf:
                right = _Leaf()
                right.keys = node.keys[mid:]
                right.vals = node.vals[mid:]
                right.next = node.next
                node.keys = node.keys[:mid]
                node.vals = node.vals[:mid]
                node.next = right
                sep = right.keys[0]
            else:
                right = _Inner()
                sep = node.keys[mid]
                right.keys = node.keys[mid + 1 :]
                right.children = node.children[mid + 1 :]
                node.keys = node.keys[:mid]
                node.children = node.children[: mid + 1]
            if path:
                parent, idx = path.pop()
                parent.keys.insert(idx, sep)
                parent.children.insert(idx + 1, right)
                node = parent
            else:
                root = _Inner()
                root.keys = [sep]
                root.children = [node, right]
                self._root = root
                break

    def delete(self, key):
        path = []
        node = self._root
        while type(node) is _Inner:
            idx = _route(node.keys, key)
            path.append((node, idx))
            node = node.children[idx]
        pos, found = _find(node.keys, key)
        if not found:
            return False
        node.keys.pop(pos)
        node.vals.pop(pos)
        self._size -= 1
        while path and len(node.keys) < self._min_keys:
            parent, idx = path.pop()
            left = parent.children[idx - 1] if idx > 0 else None
            right = parent.children[idx + 1] if idx + 1 < len(parent.children) else None
            if left is not None and len(left.keys) > self._min_keys:
                self._borrow_left(parent, idx, left, node)
                return True
            if right is not None and len(right.keys) > self._min_keys:
                self._borrow_right(parent, idx, node, right)
                return True
            if left is not None:
                self._merge(parent, idx - 1, left, node)
            else:
                self._merge(parent, idx, node, right)
            node = parent
        if type(node) is _Inner and not node.keys and node is self._root:
            self._root = node.children[0]
        return True

    def _borrow_left(self, parent, idx, left, node):
        if type(node) is _Leaf:
            node.keys.insert(0, left.keys.pop())
            node.vals.insert(0, left.vals.pop())
            parent.keys[idx - 1] = node.keys[0]
        else:
            node.keys.insert(0, parent.keys[idx - 1])
            parent.keys[idx - 1] = left.keys.pop()
            node.children.insert(0, left.children.pop())

    def _borrow_right(self, parent, idx, node, right):
        if type(node) is _Leaf:
            node.keys.append(right.keys.pop(0))
            node.vals.append(right.vals.pop(0))
            parent.keys[idx] = right.keys[0]
        else:
            node.keys.append(parent.keys[idx])
            parent.keys[idx] = right.keys.pop(0)
            node.children.append(right.children.pop(0))

    def _merge(self, parent, sep_idx, left, right):
        if type(left) is _Leaf:
            left.keys.extend(right.keys)
            left.vals.extend(right.vals)
            left.next = right.next
        else:
            left.keys.append(parent.keys[sep_idx])
            left.keys.extend(right.keys)
            left.children.extend(right.children)
        parent.keys.pop(sep_idx)
        parent.children.pop(sep_idx + 1)

    def scan(self, lo=None, hi=None):
        """Yield (key, value) in key order for keys within [lo, hi].

        Bounds are inclusive; tuple bounds shorter than the stored keys act
        as prefixes (see compare_prefix). None means unbounded.
        """
        node = self._root
        if lo is None:
            while type(node) is _Inner:
                node = node.children[0]
            pos = 0
        else:
            while type(node) is _Inner:
                keys = node.keys
                a, b = 0, len(keys)
                while a < b:
                    mid = (a + b) // 2
                    if compare_prefix(keys[mid], lo) < 0:
                        a = mid + 1
                    else:
                        b = mid
                node = node.children[a]
            keys = node.keys
            a, b = 0, len(keys)
            while a < b:
                mid = (a + b) // 2
                if compare_prefix(keys[mid], lo) < 0:
                    a = mid + 1
                else:
                    b = mid
            pos = a
        while node is not None:
            keys = node.keys
            vals = node.vals
            n = len(keys)
            while pos < n:
                key = keys[pos]
                if hi is not None and compare_prefix(key, hi) > 0:
                    return
                yield key, vals[pos]
                pos += 1
            node = node.next
            pos = 0

    def items(self):
        return self.scan()

    def validate(self):
        """Raise ValueError unless all structural invariants hold."""
        leaves = []
        n, _, _ = self._validate(self._root, True, leaves)
        if n != self._size:
            raise ValueError(f"size mismatch: counted {n}, recorded {self._size}")
        for a, b in zip(leaves, leaves[1:]):
            if a.next is not b:
                raise ValueError("leaf chain broken")
        if leaves and leaves[-1].next is not None:
            raise ValueError("leaf chain has trailing link")

    def _validate(self, node, is_root, leaves):
        maxk = self.branching - 1
        nk = len(node.keys)
        for a, b in zip(node.keys, node.keys[1:]):
            if compare_keys(a, b) >= 0:
                raise ValueError("keys out of order")
        if type(node) is _Leaf:
            if not is_root and not self._min_keys <= nk <= maxk:
                raise ValueError(f"leaf occupancy {nk} outside bounds")
            if is_root and nk > maxk:
                raise ValueError("root leaf overfull")
            leaves.append(node)
            if nk == 0:
                return 0, None, None
            return nk, node.keys[0], node.keys[-1]
        lo_b = 1 if is_root else self._min_keys
        if not lo_b <= nk <= maxk:
            raise ValueError(f"inner occupancy {nk} outside bounds")
        if len(node.children) != nk + 1:
            raise ValueError("child count mismatch")
        depths = set()
        total = 0
        mn = mx = None
        for i, child in enumerate(node.children):
            cn, cmn, cmx = self._validate(child, False, leaves)
            depths.add(self._depth_of(child))
            total += cn
            if i == 0:
                mn = cmn
            else:
                if compare_keys(node.keys[i - 1], cmn) > 0:
                    raise ValueError("separator exceeds right subtree minimum")
            if i < nk and compare_keys(cmx, node.keys[i]) >= 0:
                raise ValueError("left subtree reaches separator")
            mx = cmx
        if len(depths) != 1:
            raise ValueError("leaves at unequal depth")
        return total, mn, mx

    def _depth_of(self, node):
        d = 1
        while type(node) is _Inner:
            node = node.children[0]
            d += 1
        return d
