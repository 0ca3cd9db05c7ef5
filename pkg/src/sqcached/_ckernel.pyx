# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels: value ordering, LIKE matching, and the B-tree.

Behaviourally identical to sqcached.kernel_py; that module is the
reference for the semantics and this one exists for speed. Keep the two
in lockstep (tests/test_kernel_btree.py runs the same suite on both).
"""

BACKEND = "compiled"


cdef inline int _rank(object v) except -1:
    t = type(v)
    if t is int or t is float or t is bool:
        return 1
    if t is str:
        return 2
    if t is bytes:
        return 3
    raise TypeError(f"unorderable value of type {t.__name__}")


cdef int _cmp_values(object a, object b) except? -9:
    if a is None:
        return 0 if b is None else -1
    if b is None:
        return 1
    cdef int ra = _rank(a)
    cdef int rb = _rank(b)
    if ra != rb:
        return -1 if ra < rb else 1
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


cdef int _cmp_keys(object a, object b) except? -9:
    cdef Py_ssize_t i, la, lb, n
    cdef int c
    if type(a) is int and type(b) is int:
        if a < b:
            return -1
        return 1 if a > b else 0
    if type(a) is tuple and type(b) is tuple:
        la = len(<tuple>a)
        lb = len(<tuple>b)
        n = la if la < lb else lb
        for i in range(n):
            c = _cmp_values((<tuple>a)[i], (<tuple>b)[i])
            if c:
                return c
        if la < lb:
            return -1
        return 1 if la > lb else 0
    return _cmp_values(a, b)


cdef int _cmp_prefix(object key, object bound) except? -9:
    cdef Py_ssize_t i, n, lk, lb
    cdef int c
    if type(key) is tuple and type(bound) is tuple:
        lk = len(<tuple>key)
        lb = len(<tuple>bound)
        n = lk if lk < lb else lb
        for i in range(n):
            c = _cmp_values((<tuple>key)[i], (<tuple>bound)[i])
            if c:
                return c
        return 0
    return _cmp_keys(key, bound)


def compare_values(a, b):
    """Total order over cell values: null < numeric < text < blob."""
    return _cmp_values(a, b)


def compare_keys(a, b):
    """Order over B-tree keys: bare ints or tuples of cell values."""
    return _cmp_keys(a, b)


def compare_prefix(key, bound):
    """compare_keys with shorter tuple bounds matching any extension."""
    return _cmp_prefix(key, bound)


cdef inline Py_UCS4 _fold(Py_UCS4 c):
    if 65 <= <long>c <= 90:
        return <Py_UCS4>(<long>c + 32)
    return c


def like_match(pattern, subject):
    """SQL LIKE: % matches any run, _ one character; ASCII-case-blind."""
    if type(subject) is not str:
        return False
    cdef str p = <str>pattern
    cdef str s = <str>subject
    cdef Py_ssize_t np = len(p), ns = len(s)
    cdef Py_ssize_t i = 0, j = 0, star = -1, mark = 0
    cdef Py_UCS4 pc
    while i < ns:
        if j < np:
            pc = p[j]
            if pc == u'%':
                star = j
                mark = i
                j += 1
                continue
            if pc == u'_' or _fold(pc) == _fold(s[i]):
                i += 1
                j += 1
                continue
        if star >= 0:
            mark += 1
            i = mark
            j = star + 1
            continue
        return False
    while j < np and p[j] == u'%':
        j += 1
    return j == np


cdef class _Leaf:
    cdef public list keys
    cdef public list vals
    cdef public _Leaf next

    def __cinit__(self):
        self.keys = []
        self.vals = []
        self.next = None


cdef class _Inner:
    cdef public list keys
    cdef public list children

    def __cinit__(self):
        self.keys = []
        self.children = []


cdef Py_ssize_t _find(list keys, object key, bint *found) except? -9:
    cdef Py_ssize_t lo = 0, hi = len(keys), mid
    cdef int c
    while lo < hi:
        mid = (lo + hi) // 2
        c = _cmp_keys(keys[mid], key)
        if c < 0:
            lo = mid + 1
        elif c > 0:
            hi = mid
        else:
            found[0] = True
            return mid
    found[0] = False
    return lo


cdef Py_ssize_t _route(list keys, object key) except? -9:
    cdef Py_ssize_t lo = 0, hi = len(keys), mid
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp_keys(keys[mid], key) <= 0:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef Py_ssize_t _lower_bound(list keys, object bound) except? -9:
    cdef Py_ssize_t lo = 0, hi = len(keys), mid
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp_prefix(keys[mid], bound) < 0:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef class BTree:
    """B+ tree with payloads in leaves and separator keys above.

    Same contract as the pure-Python twin: unique keys, uniform leaf
    depth, non-root occupancy within [ceil(B/2)-1, B-1].
    """

    cdef object _root
    cdef Py_ssize_t _size
    cdef readonly int branching
    cdef int _min_keys

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
        cdef int d = 1
        node = self._root
        while type(node) is _Inner:
            node = (<_Inner>node).children[0]
            d += 1
        return d

    def get(self, key, default=None):
        cdef bint found = False
        cdef Py_ssize_t pos
        node = self._root
        while type(node) is _Inner:
            node = (<_Inner>node).children[_route((<_Inner>node).keys, key)]
        pos = _find((<_Leaf>node).keys, key, &found)
        if found:
            return (<_Leaf>node).vals[pos]
        return default

    def contains(self, key):
        sentinel = object()
        return self.get(key, sentinel) is not sentinel

    def insert(self, key, value):
        cdef list stack_nodes = []
        cdef list stack_idx = []
        cdef bint found = False
        cdef Py_ssize_t idx, pos, mid
        cdef _Leaf leaf, right_leaf
        cdef _Inner inner, right_inner, root
        node = self._root
        while type(node) is _Inner:
            idx = _route((<_Inner>node).keys, key)
            stack_nodes.append(node)
            stack_idx.append(idx)
            node = (<_Inner>node).children[idx]
        leaf = <_Leaf>node
        pos = _find(leaf.keys, key, &found)
        if found:
            raise KeyError("duplicate key")
        leaf.keys.insert(pos, key)
        leaf.vals.insert(pos, value)
        self._size += 1
        current = node
        while len((<list>current.keys)) >= self.branching:
            mid = self.branching // 2
            if type(current) is _Leaf:
                leaf = <_Leaf>current
                right_leaf = _Leaf()
                right_leaf.keys = leaf.keys[mid:]
                right_leaf.vals = leaf.vals[mid:]
                right_leaf.next = leaf.next
                leaf.keys = leaf.keys[:mid]
                leaf.vals = leaf.vals[:mid]
                leaf.next = right_leaf
                sep = right_leaf.keys[0]
                right = right_leaf
            else:
                inner = <_Inner>current
                right_inner = _Inner()
                sep = inner.keys[mid]
                right_inner.keys = inner.keys[mid + 1:]
                right_inner.children = inner.children[mid + 1:]
                inner.keys = inner.keys[:mid]
                inner.children = inner.children[:mid + 1]
                right = right_inner
            if stack_nodes:
                parent = <_Inner>stack_nodes.pop()
                idx = stack_idx.pop()
                parent.keys.insert(idx, sep)
                parent.children.insert(idx + 1, right)
                current = parent
            else:
                root = _Inner()
                root.keys = [sep]
                root.children = [current, right]
                self._root = root
                break

    def delete(self, key):
        cdef list stack_nodes = []
        cdef list stack_idx = []
        cdef bint found = False
        cdef Py_ssize_t idx, pos
        node = self._root
        while type(node) is _Inner:
            idx = _route((<_Inner>node).keys, key)
            stack_nodes.append(node)
            stack_idx.append(idx)
            node = (<_Inner>node).children[idx]
        cdef _Leaf leaf = <_Leaf>node
        pos = _find(leaf.keys, key, &found)
        if not found:
            return False
        leaf.keys.pop(pos)
        leaf.vals.pop(pos)
        self._size -= 1
        current = node
        cdef _Inner parent
        while stack_nodes and len((<list>current.keys)) < self._min_keys:
            parent = <_Inner>stack_nodes.pop()
            idx = stack_idx.pop()
            left = parent.children[idx - 1] if idx > 0 else None
            right = (
                parent.children[idx + 1]
                if idx + 1 < len(parent.children)
                else None
            )
            if left is not None and len((<list>(<object>left).keys)) > self._min_keys:
                self._borrow_left(parent, idx, left, current)
                return True
            if right is not None and len((<list>(<object>right).keys)) > self._min_keys:
                self._borrow_right(parent, idx, current, right)
                return True
            if left is not None:
                self._merge(parent, idx - 1, left, current)
            else:
                self._merge(parent, idx, current, right)
            current = parent
        if type(current) is _Inner and not (<_Inner>current).keys and current is self._root:
            self._root = (<_Inner>current).children[0]
        return True

    cdef _borrow_left(self, _Inner parent, Py_ssize_t idx, object left, object node):
        cdef _Leaf lleaf, nleaf
        cdef _Inner linner, ninner
        if type(node) is _Leaf:
            lleaf = <_Leaf>left
            nleaf = <_Leaf>node
            nleaf.keys.insert(0, lleaf.keys.pop())
            nleaf.vals.insert(0, lleaf.vals.pop())
            parent.keys[idx - 1] = nleaf.keys[0]
        else:
            linner = <_Inner>left
            ninner = <_Inner>node
            ninner.keys.insert(0, parent.keys[idx - 1])
            parent.keys[idx - 1] = linner.keys.pop()
            ninner.children.insert(0, linner.children.pop())

    cdef _borrow_right(self, _Inner parent, Py_ssize_t idx, object node, object right):
        cdef _Leaf rleaf, nleaf
        cdef _Inner rinner, ninner
        if type(node) is _Leaf:
            rleaf = <_Leaf>right
            nleaf = <_Leaf>node
            nleaf.keys.append(rleaf.keys.pop(0))
            nleaf.vals.append(rleaf.vals.pop(0))
            parent.keys[idx] = rleaf.keys[0]
        else:
            rinner = <_Inner>right
            ninner = <_Inner>node
            ninner.keys.append(parent.keys[idx])
            parent.keys[idx] = rinner.keys.pop(0)
            ninner.children.append(rinner.children.pop(0))

    cdef _merge(self, _Inner parent, Py_ssize_t sep_idx, object left, object right):
        cdef _Leaf lleaf, rleaf
        cdef _Inner linner, rinner
        if type(left) is _Leaf:
            lleaf = <_Leaf>left
            rleaf = <_Leaf>right
            lleaf.keys.extend(rleaf.keys)
            lleaf.vals.extend(rleaf.vals)
            lleaf.next = rleaf.next
        else:
            linner = <_Inner>left
            rinner = <_Inner>right
            linner.keys.append(parent.keys[sep_idx])
            linner.keys.extend(rinner.keys)
            linner.children.extend(rinner.children)
        parent.keys.pop(sep_idx)
        parent.children.pop(sep_idx + 1)

    def scan(self, lo=None, hi=None):
        """Yield (key, value) in order within inclusive prefix bounds."""
        cdef Py_ssize_t pos
        node = self._root
        if lo is None:
            while type(node) is _Inner:
                node = (<_Inner>node).children[0]
            pos = 0
        else:
            while type(node) is _Inner:
                node = (<_Inner>node).children[
                    _lower_bound((<_Inner>node).keys, lo)
                ]
            pos = _lower_bound((<_Leaf>node).keys, lo)
        cdef _Leaf leaf = <_Leaf>node
        while leaf is not None:
            keys = leaf.keys
            vals = leaf.vals
            n = len(keys)
            while pos < n:
                key = keys[pos]
                if hi is not None and _cmp_prefix(key, hi) > 0:
                    return
                yield key, vals[pos]
                pos += 1
            leaf = leaf.next
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
            if (<_Leaf>a).next is not b:
                raise ValueError("leaf chain broken")
        if leaves and (<_Leaf>leaves[len(leaves) - 1]).next is not None:
            raise ValueError("leaf chain has trailing link")

    def _validate(self, node, is_root, leaves):
        cdef Py_ssize_t maxk = self.branching - 1
        keys = node.keys
        cdef Py_ssize_t nk = len(keys)
        cdef Py_ssize_t i
        for i in range(nk - 1):
            if _cmp_keys(keys[i], keys[i + 1]) >= 0:
                raise ValueError("keys out of order")
        if type(node) is _Leaf:
            if not is_root and not (self._min_keys <= nk <= maxk):
                raise ValueError(f"leaf occupancy {nk} outside bounds")
            if is_root and nk > maxk:
                raise ValueError("root leaf overfull")
            leaves.append(node)
            if nk == 0:
                return 0, None, None
            return nk, keys[0], keys[nk - 1]
        lo_b = 1 if is_root else self._min_keys
        if not (lo_b <= nk <= maxk):
            raise ValueError(f"inner occupancy {nk} outside bounds")
        children = (<_Inner>node).children
        if len(children) != nk + 1:
            raise ValueError("child count mismatch")
        depths = set()
        total = 0
        mn = mx = None
        for i in range(len(children)):
            child = children[i]
            cn, cmn, cmx = self._validate(child, False, leaves)
            depths.add(self._depth_of(child))
            total += cn
            if i == 0:
                mn = cmn
            else:
                if _cmp_keys(keys[i - 1], cmn) > 0:
                    raise ValueError("separator exceeds right subtree minimum")
            if i < nk and _cmp_keys(cmx, keys[i]) >= 0:
                raise ValueError("left subtree reaches separator")
            mx = cmx
        if len(depths) != 1:
            raise ValueError("leaves at unequal depth")
        return total, mn, mx

    def _depth_of(self, node):
        cdef int d = 1
        while type(node) is _Inner:
            node = (<_Inner>node).children[0]
            d += 1
        return d
