"""Matrix groups over small finite fields as ground truth for the zip combinatorics.

GL_n / SL_n(F_q) with a standard parabolic P cut out by weakly decreasing
cocharacter weights.  The zip group of the pair (P, Q) acts by (p, q) . g =
p g q^{-1}; its orbits over the algebraic closure are labelled by minimal
coset representatives, and this module realises, by brute force plus a tower
of finite extensions, the orbit partition, the merge of rational orbits into
geometric ones, the Lang map h -> h phi(h)^{-1}, and point counts of the fine
Deligne-Lusztig strata on the flag variety P_- \\ H.

Matrices are tuples of tuples of field codes; bulk work uses numpy arrays of
codes with table-driven arithmetic.  phi is always the entrywise p-power
(arithmetic Frobenius of the prime field), matching the split Weyl-group
Frobenius of GL/SL.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import ConfigurationError, ConsistencyError, ResourceCapError, UsageError
from .fq import MAX_Q, Fq
from .parabolic import TypeSubset, coset_system, opposite_type
from .root_weyl import CartanDatum, WeylElement, build_root_system

DEFAULT_GROUP_CAP = 200_000
DEFAULT_LEVI_CAP = 60_000
_DENSE_DECODE_LIMIT = 1 << 22


def _group_cap(cap):
    if cap is not None:
        return cap
    raw = os.environ.get("ZIPSTRATA_CAP")
    return int(raw) if raw else DEFAULT_GROUP_CAP


# -- matrices over Fq ---------------------------------------------------------


def mat_identity(n: int) -> tuple:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(F: Fq, a, b) -> tuple:
    n = len(a)
    m = len(b[0])
    k = len(b)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = 0
            for t in range(k):
                acc = F.add(acc, F.mul(a[i][t], b[t][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_inv(F: Fq, a) -> tuple:
    n = len(a)
    aug = [list(a[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise UsageError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pinv = F.inv(aug[col][col])
        aug[col] = [F.mul(pinv, x) for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                c = aug[r][col]
                aug[r] = [F.sub(x, F.mul(c, y)) for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def mat_det(F: Fq, a) -> int:
    n = len(a)
    m = [list(row) for row in a]
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = F.neg(det)
        det = F.mul(det, m[col][col])
        pinv = F.inv(m[col][col])
        for r in range(col + 1, n):
            if m[r][col]:
                c = F.mul(pinv, m[r][col])
                m[r] = [F.sub(x, F.mul(c, y)) for x, y in zip(m[r], m[col])]
    return det


def mat_frob(F: Fq, a) -> tuple:
    return tuple(tuple(F.frob(x) for x in row) for row in a)


def bmatmul(F: Fq, a, b) -> np.ndarray:
    """Batched matrix product of code arrays; leading axes broadcast."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    prods = F.mul_table[a[..., :, :, None], b[..., None, :, :]]
    if F.p == 2:
        return np.bitwise_xor.reduce(prods, axis=-2)
    acc = prods[..., 0, :]
    for t in range(1, prods.shape[-2]):
        acc = F.add_table[acc, prods[..., t, :]]
    return acc


def bfrob(F: Fq, a) -> np.ndarray:
    return F.frob_table[np.asarray(a, dtype=np.uint8)]


# -- group specification ------------------------------------------------------


@dataclass(frozen=True)
class FqGroupSpec:
    """A matrix group over F_q plus cocharacter weights defining the parabolic P."""

    family: str
    n: int
    field: Fq
    cochar_weights: tuple[int, ...]
    frobenius_power: int = 0  # 0 means "use the characteristic"

    def __post_init__(self):
        if self.family not in ("GL", "SL"):
            raise ConfigurationError(f"unsupported family {self.family!r} (GL or SL)")
        if self.n < 2:
            raise ConfigurationError("matrix size n must be at least 2")
        if len(self.cochar_weights) != self.n:
            raise ConfigurationError("cochar_weights must have length n")
        if any(a < b for a, b in zip(self.cochar_weights, self.cochar_weights[1:])):
            raise ConfigurationError(
                "cochar_weights must be weakly decreasing so that P contains the"
                " standard Borel"
            )
        if self.frobenius_power == 0:
            object.__setattr__(self, "frobenius_power", self.field.p)
        if self.frobenius_power != self.field.p:
            raise ConfigurationError(
                "only the characteristic itself is supported as frobenius_power"
            )

    @property
    def blocks(self) -> tuple[int, ...]:
        out = []
        for _, grp in itertools.groupby(self.cochar_weights):
            out.append(len(list(grp)))
        return tuple(out)

    @property
    def type_subset(self) -> TypeSubset:
        w = self.cochar_weights
        return TypeSubset(frozenset(i for i in range(1, self.n) if w[i - 1] == w[i]))

    def weyl_system(self):
        return _weyl_system(self.n)

    def field_at(self, level: int) -> Fq:
        if level == 1:
            return self.field
        if self.field.q ** level > MAX_Q:
            raise ConfigurationError(
                f"extension level {level} needs F_{self.field.q ** level}, beyond the"
                f" supported bound {MAX_Q}"
            )
        return self.field.extension(level)

    def label(self) -> str:
        return f"{self.family}{self.n}(F{self.field.q})"


_WEYL_CACHE: dict = {}


def _weyl_system(n: int):
    if n not in _WEYL_CACHE:
        _WEYL_CACHE[n] = build_root_system(CartanDatum("A", n - 1))
    return _WEYL_CACHE[n]


def one_line(w: WeylElement) -> tuple[int, ...]:
    """The 0-based one-line permutation of 1..n matching the product convention."""
    n = w.system.rank + 1
    acc = list(range(n))
    for i in w.reduced_word():
        # acc <- acc o s_i (rightmost letter acts first overall)
        j = i - 1
        acc = [acc[j + 1] if x == j else acc[j] if x == j + 1 else acc[x] for x in range(n)]
    return tuple(acc)


def weyl_representative_matrix(w: WeylElement) -> tuple:
    """The permutation matrix of w: columns e_j -> e_{w(j)}.

    Permutation matrices multiply exactly like the underlying permutations, so
    the representatives are multiplicative on every pair, in particular on
    length-additive ones.
    """
    pi = one_line(w)
    n = len(pi)
    return tuple(tuple(1 if i == pi[j] else 0 for j in range(n)) for i in range(n))


def _group_representative(spec: FqGroupSpec, w: WeylElement, F: Fq) -> tuple:
    """A representative of w inside the group: sign-fixed for SL in odd characteristic."""
    mat = weyl_representative_matrix(w)
    if spec.family == "SL" and F.p != 2:
        det = mat_det(F, mat)
        if det != 1:
            mat = tuple(
                tuple(F.neg(x) if j == 0 else x for j, x in enumerate(row)) for row in mat
            )
    return mat


def weyl_from_one_line(rs, pi) -> WeylElement:
    """The Weyl element of the type-A system whose one-line form is pi."""
    table = _one_line_table(rs)
    return table[tuple(pi)]


_ONE_LINE_CACHE: dict = {}


def _one_line_table(rs):
    key = id(rs)
    if key not in _ONE_LINE_CACHE:
        _ONE_LINE_CACHE[key] = {one_line(w): w for w in rs.elements()}
    return _ONE_LINE_CACHE[key]


def bruhat_cell(F: Fq, x) -> tuple[int, ...]:
    """The permutation w (0-based one-line) with x in B w~ B, B upper triangular.

    Lowest-pivot reduction: row operations add lower rows to upper rows, column
    operations add earlier columns to later ones; both preserve the cell.
    """
    n = len(x)
    m = [list(row) for row in x]
    used = [False] * n
    w = [0] * n
    for j in range(n):
        pivot = max(r for r in range(n) if not used[r] and m[r][j])
        w[j] = pivot
        used[pivot] = True
        pinv = F.inv(m[pivot][j])
        for r in range(pivot):
            if m[r][j]:
                c = F.mul(m[r][j], pinv)
                m[r] = [F.sub(a, F.mul(c, b)) for a, b in zip(m[r], m[pivot])]
        for jp in range(j + 1, n):
            if m[pivot][jp]:
                c = F.mul(m[pivot][jp], pinv)
                for r in range(n):
                    m[r][jp] = F.sub(m[r][jp], F.mul(c, m[r][j]))
    return tuple(w)


def min_double_coset_rep(rs, w: WeylElement, left: TypeSubset, right: TypeSubset) -> WeylElement:
    """The minimal-length element of W_left * w * W_right."""
    cur = w
    while True:
        for i in left.sorted():
            if rs.has_left_descent(cur, i):
                cur = rs.simple(i) * cur
                break
        else:
            for j in right.sorted():
                if rs.has_right_descent(cur, j):
                    cur = cur * rs.simple(j)
                    break
            else:
                return cur


# -- group enumeration --------------------------------------------------------


def group_order(family: str, n: int, q: int) -> int:
    order = 1
    for i in range(n):
        order *= q**n - q**i
    if family == "SL":
        order //= q - 1
    return order


@dataclass
class GroupData:
    """All elements of the group at one field level, with O(1) code lookup."""

    field: Fq
    n: int
    mats: np.ndarray  # (N, n, n) uint8
    codes: np.ndarray  # (N,) int64
    _decode: object = field(default=None, repr=False)

    def __post_init__(self):
        space = self.field.q ** (self.n * self.n)
        if space <= _DENSE_DECODE_LIMIT:
            dec = np.full(space, -1, dtype=np.int64)
            dec[self.codes] = np.arange(len(self.codes))
            self._decode = dec
        else:
            self._decode = {int(c): i for i, c in enumerate(self.codes)}

    def __len__(self):
        return len(self.codes)

    def index_of_codes(self, codes: np.ndarray) -> np.ndarray:
        if isinstance(self._decode, np.ndarray):
            idx = self._decode[codes]
        else:
            idx = np.array([self._decode.get(int(c), -1) for c in codes], dtype=np.int64)
        if (idx < 0).any():
            raise ConsistencyError("orbit image left the enumerated group")
        return idx

    def index_of_matrix(self, mat) -> int:
        return int(self.index_of_codes(np.array([encode_matrix(self.field, mat)]))[0])


def _code_powers(F: Fq, n: int) -> np.ndarray:
    return (F.q ** np.arange(n * n, dtype=np.int64)).reshape(n, n)


def encode_matrix(F: Fq, mat) -> int:
    return int(sum(int(x) * p for row, prow in zip(mat, _code_powers(F, len(mat))) for x, p in zip(row, prow)))


def encode_batch(F: Fq, mats: np.ndarray) -> np.ndarray:
    n = mats.shape[-1]
    return (mats.astype(np.int64) * _code_powers(F, n)).sum(axis=(-2, -1))


def enumerate_group(spec: FqGroupSpec, level: int = 1, cap: int | None = None) -> GroupData:
    """All matrices of the group at the given tower level, each exactly once."""
    F = spec.field_at(level)
    n = spec.n
    order = group_order(spec.family, n, F.q)
    cap = _group_cap(cap)
    if order > cap:
        raise ResourceCapError(
            f"|{spec.family}_{n}(F_{F.q})| = {order} exceeds the cap {cap};"
            " raise it explicitly or via ZIPSTRATA_CAP if you really want this"
        )
    space = F.q ** (n * n)
    if n <= 3 and space <= _DENSE_DECODE_LIMIT:
        mats = _enumerate_dense(F, n, spec.family)
    else:
        mats = _enumerate_columns(F, n, spec.family)
    if len(mats) != order:
        raise ConfigurationError(
            f"enumeration produced {len(mats)} matrices, expected {order}"
        )
    codes = encode_batch(F, mats)
    order_idx = np.argsort(codes)
    return GroupData(F, n, mats[order_idx], codes[order_idx])


def _enumerate_dense(F: Fq, n: int, family: str) -> np.ndarray:
    space = F.q ** (n * n)
    codes = np.arange(space, dtype=np.int64)
    digits = (codes[:, None] // (F.q ** np.arange(n * n, dtype=np.int64))) % F.q
    mats = digits.astype(np.uint8).reshape(space, n, n)
    det = _batch_det_small(F, mats)
    keep = det == 1 if family == "SL" else det != 0
    return mats[keep]


def _batch_det_small(F: Fq, mats: np.ndarray) -> np.ndarray:
    m = mats
    mul, add = F.mul_table, F.add_table

    def sub(a, b):
        return add[a, F.neg_table[b]]

    n = mats.shape[-1]
    if n == 2:
        return sub(mul[m[:, 0, 0], m[:, 1, 1]], mul[m[:, 0, 1], m[:, 1, 0]])
    if n == 3:
        pos = add[
            add[mul[mul[m[:, 0, 0], m[:, 1, 1]], m[:, 2, 2]],
                mul[mul[m[:, 0, 1], m[:, 1, 2]], m[:, 2, 0]]],
            mul[mul[m[:, 0, 2], m[:, 1, 0]], m[:, 2, 1]],
        ]
        neg = add[
            add[mul[mul[m[:, 0, 2], m[:, 1, 1]], m[:, 2, 0]],
                mul[mul[m[:, 0, 1], m[:, 1, 0]], m[:, 2, 2]]],
            mul[mul[m[:, 0, 0], m[:, 1, 2]], m[:, 2, 1]],
        ]
        return sub(pos, neg)
    raise UsageError("dense determinant only implemented for n <= 3")


def _enumerate_columns(F: Fq, n: int, family: str) -> np.ndarray:
    """Column-by-column enumeration with explicit span tracking (n >= 4 fallback)."""
    q = F.q
    vec_codes = [tuple((v // q**i) % q for i in range(n)) for v in range(q**n)]
    out = []

    def extend(cols, span):
        depth = len(cols)
        if depth == n:
            mat = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
            if family == "SL" and mat_det(F, mat) != 1:
                return
            out.append(mat)
            return
        for vec in vec_codes:
            if vec in span:
                continue
            new_span = set(span)
            for s in span:
                for t in F.units():
                    new_span.add(tuple(F.add(a, F.mul(t, b)) for a, b in zip(s, vec)))
            extend(cols + [vec], new_span)

    extend([], {tuple([0] * n)})
    return np.array(out, dtype=np.uint8)


# -- parabolic patterns and the zip group -------------------------------------


def _block_index(blocks: tuple[int, ...]) -> list[int]:
    out = []
    for b, size in enumerate(blocks):
        out.extend([b] * size)
    return out


@dataclass(frozen=True)
class ZipRealisation:
    """Patterns of the pair (P, Q) and their common Levi for one flavor.

    P is the standard block-upper parabolic of the given blocks; Q is the
    block-lower opposite (EO flavor, Q = P_-^{(p)}) or P itself (DL flavor,
    Q = P^{(p)}).  The Levi is the block diagonal in both cases, and the
    zip pairs are (p, q) with Levi(q) = phi(Levi(p)).
    """

    spec: FqGroupSpec
    flavor: str
    blocks: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.spec.n

    def levi_mask(self) -> np.ndarray:
        bi = _block_index(self.blocks)
        n = self.n
        return np.array([[bi[i] == bi[j] for j in range(n)] for i in range(n)], dtype=bool)

    def p_mask(self) -> np.ndarray:
        bi = _block_index(self.blocks)
        n = self.n
        return np.array([[bi[i] <= bi[j] for j in range(n)] for i in range(n)], dtype=bool)

    def q_mask(self) -> np.ndarray:
        if self.flavor == "DL":
            return self.p_mask()
        return self.p_mask().T

    def u_positions(self, mask: np.ndarray) -> list[tuple[int, int]]:
        n = self.n
        return [(i, j) for i in range(n) for j in range(n) if mask[i, j] and i != j and not self.levi_mask()[i, j]]


def realisation(spec: FqGroupSpec, flavor: str, blocks: tuple[int, ...] | None = None) -> ZipRealisation:
    flavor = flavor.upper()
    if flavor not in ("EO", "DL"):
        raise UsageError(f"unknown flavor {flavor!r}")
    return ZipRealisation(spec, flavor, blocks or spec.blocks)


def _unipotent_elements(F: Fq, n: int, positions) -> list[tuple]:
    """All elements of the unipotent pattern group on the given positions."""
    out = []
    for values in itertools.product(F.elements(), repeat=len(positions)):
        mat = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        for (i, j), v in zip(positions, values):
            mat[i][j] = v
        out.append(tuple(tuple(row) for row in mat))
    return out


def _levi_elements(spec: FqGroupSpec, blocks, F: Fq, cap: int | None = None):
    """All block-diagonal elements (with det 1 overall for SL), plus inverses."""
    cap = cap if cap is not None else DEFAULT_LEVI_CAP
    total = 1
    for b in blocks:
        total *= group_order("GL", b, F.q) if b > 1 else F.q - 1
    if spec.family == "SL":
        total //= F.q - 1
    if total > cap:
        raise ResourceCapError(
            f"|Levi(F_{F.q})| = {total} exceeds the Levi cap {cap}"
        )
    per_block = []
    for b in blocks:
        if b == 1:
            per_block.append([((u,),) for u in F.units()])
        else:
            sub = FqGroupSpec("GL", b, F, tuple([0] * b))
            per_block.append([tuple(tuple(int(x) for x in row) for row in m)
                              for m in enumerate_group(sub, cap=10**9).mats])
    n = spec.n
    offsets = np.cumsum([0] + list(blocks))
    out = []
    for combo in itertools.product(*per_block):
        mat = [[0] * n for _ in range(n)]
        det = 1
        for b, block_mat in enumerate(combo):
            o = offsets[b]
            for i, row in enumerate(block_mat):
                for j, x in enumerate(row):
                    mat[o + i][o + j] = x
        mat = tuple(tuple(row) for row in mat)
        if spec.family == "SL":
            det = mat_det(F, mat)
            if det != 1:
                continue
        out.append(mat)
    return out


def zip_group_order(spec: FqGroupSpec, flavor: str, level: int = 1) -> int:
    F = spec.field_at(level)
    real = realisation(spec, flavor)
    levi = 1
    for b in real.blocks:
        levi *= group_order("GL", b, F.q)
    if spec.family == "SL":
        levi //= F.q - 1
    u_count = len(real.u_positions(real.p_mask()))
    return levi * F.q ** (2 * u_count)


def zip_group(spec: FqGroupSpec, flavor: str, level: int = 1, cap: int | None = None) -> list:
    """All pairs (a, b) in P x Q whose Levi blocks match under Frobenius."""
    F = spec.field_at(level)
    cap = _group_cap(cap)
    if zip_group_order(spec, flavor, level) > cap:
        raise ResourceCapError(
            f"|E(F_{F.q})| = {zip_group_order(spec, flavor, level)} exceeds the cap {cap}"
        )
    real = realisation(spec, flavor)
    n = spec.n
    levi = _levi_elements(spec, real.blocks, F, cap=cap)
    u_p = _unipotent_elements(F, n, real.u_positions(real.p_mask()))
    u_q = _unipotent_elements(F, n, real.u_positions(real.q_mask()))
    pairs = []
    for ell in levi:
        ell_f = mat_frob(F, ell)
        for u in u_p:
            a = mat_mul(F, ell, u)
            for v in u_q:
                pairs.append((a, mat_mul(F, ell_f, v)))
    return pairs


def zip_generator_pairs(spec: FqGroupSpec, flavor: str, F: Fq) -> list:
    """Pairs generating E(F): Levi pairs (l, phi(l)) plus one-sided unipotents."""
    real = realisation(spec, flavor)
    n = spec.n
    ident = mat_identity(n)
    gens = []
    bi = _block_index(real.blocks)
    # torus part (det 1 for SL)
    for diag in itertools.product(F.units(), repeat=n):
        mat = tuple(tuple(diag[i] if i == j else 0 for j in range(n)) for i in range(n))
        if spec.family == "SL" and mat_det(F, mat) != 1:
            continue
        gens.append((mat, mat_frob(F, mat)))
    # Levi root elements (inside blocks; det 1 automatically)
    for i in range(n):
        for j in range(n):
            if i != j and bi[i] == bi[j]:
                for t in F.units():
                    mat = tuple(
                        tuple(1 if a == b else (t if (a, b) == (i, j) else 0) for b in range(n))
                        for a in range(n)
                    )
                    gens.append((mat, mat_frob(F, mat)))
    for i, j in real.u_positions(real.p_mask()):
        for t in F.units():
            mat = tuple(
                tuple(1 if a == b else (t if (a, b) == (i, j) else 0) for b in range(n))
                for a in range(n)
            )
            gens.append((mat, ident))
    for i, j in real.u_positions(real.q_mask()):
        for t in F.units():
            mat = tuple(
                tuple(1 if a == b else (t if (a, b) == (i, j) else 0) for b in range(n))
                for a in range(n)
            )
            gens.append((ident, mat))
    return gens


# -- orbits -------------------------------------------------------------------


@dataclass
class OrbitTable:
    spec: FqGroupSpec
    flavor: str
    level: int
    group: GroupData
    orbit_id: np.ndarray
    n_orbits: int
    sizes: np.ndarray
    representative_labels: dict  # reduced word of w in {}^I W -> orbit id

    def orbits(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.orbit_id == k) for k in range(self.n_orbits)]

    def orbit_members(self, oid: int) -> np.ndarray:
        return self.group.mats[self.orbit_id == oid]

    def orbit_of_matrix(self, mat) -> int:
        return int(self.orbit_id[self.group.index_of_matrix(mat)])


def orbit_partition_from_pairs(group: GroupData, pairs) -> tuple[np.ndarray, int]:
    """Orbit ids on `group` under x -> a x b^{-1} for the given generating pairs."""
    F = group.field
    nelts = len(group)
    rows = [np.arange(nelts, dtype=np.int64)]
    cols = [np.arange(nelts, dtype=np.int64)]
    for a, b in pairs:
        b_inv = mat_inv(F, b)
        imgs = bmatmul(F, np.asarray(a, np.uint8), group.mats)
        imgs = bmatmul(F, imgs, np.asarray(b_inv, np.uint8))
        idx = group.index_of_codes(encode_batch(F, imgs))
        rows.append(np.arange(nelts, dtype=np.int64))
        cols.append(idx)
    row = np.concatenate(rows)
    col = np.concatenate(cols)
    graph = coo_matrix((np.ones(len(row), dtype=np.int8), (row, col)), shape=(nelts, nelts))
    n_orbits, labels = connected_components(graph, directed=False)
    return labels, n_orbits


def _orbit_reps_for_labels(spec: FqGroupSpec, flavor: str, F: Fq):
    """(reduced word of w, representative matrix w~ z~^{-1}) for w in {}^I W."""
    rs = spec.weyl_system()
    I = spec.type_subset
    cs = coset_system(rs, I)
    if flavor == "EO":
        phi_I = I  # split Frobenius on GL/SL
        K = opposite_type(rs, phi_I)
        z = coset_system(rs, K).w0_upper_I  # w0^K
        z_mat_inv = mat_inv(F, _group_representative(spec, z, F))
        out = []
        for w in cs.left_reps:
            rep = mat_mul(F, _group_representative(spec, w, F), z_mat_inv)
            out.append((w.reduced_word(), rep))
        return out
    return [(w.reduced_word(), _group_representative(spec, w, F)) for w in cs.left_reps]


_ORBIT_CACHE: dict = {}


def orbit_partition(
    spec: FqGroupSpec, flavor: str, level: int = 1, cap: int | None = None
) -> OrbitTable:
    """E(F)-orbits on the full group at one level, via generator-seeded components."""
    flavor = flavor.upper()
    key = (spec.family, spec.n, spec.field.q, spec.cochar_weights, flavor, level)
    if key in _ORBIT_CACHE:
        return _ORBIT_CACHE[key]
    group = enumerate_group(spec, level, cap)
    gens = zip_generator_pairs(spec, flavor, group.field)
    labels, n_orbits = orbit_partition_from_pairs(group, gens)
    sizes = np.bincount(labels, minlength=n_orbits)
    rep_labels = {}
    for word, rep in _orbit_reps_for_labels(spec, flavor, group.field):
        rep_labels[word] = int(labels[group.index_of_matrix(rep)])
    table = OrbitTable(spec, flavor, level, group, labels, n_orbits, sizes, rep_labels)
    _ORBIT_CACHE[key] = table
    return table


@dataclass
class MergeReport:
    spec: FqGroupSpec
    flavor: str
    levels: tuple[int, ...]
    base_orbit_count: int
    merged_counts: tuple[int, ...]  # accumulated merge after each tower level
    expected: int  # |{}^I W|
    merged_geometric: tuple[int, ...]  # class id per base orbit, after the full tower
    representative_classes: dict  # reduced word -> merged class id
    stable: bool
    reps_distinct: bool
    level_methods: tuple[str, ...]

    @property
    def merged_count(self) -> int:
        return self.merged_counts[-1]

    @property
    def matches_expected(self) -> bool:
        return self.stable and self.merged_count == self.expected

    @property
    def conclusive(self) -> bool:
        return self.stable


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        self.parent[self.find(x)] = self.find(y)

    def classes(self):
        roots = {}
        return tuple(roots.setdefault(self.find(i), len(roots)) for i in range(len(self.parent)))


def geometric_merge(
    spec: FqGroupSpec,
    flavor: str,
    levels,
    cap: int | None = None,
    levi_cap: int | None = None,
) -> MergeReport:
    """Merge base-field orbits that become connected over an extension tower.

    Connectivity accumulates: two base orbits land in one class as soon as
    their representatives share an E(F_{q^T})-orbit at any tower level T
    (different levels can contribute different joins, so the tower need not be
    a divisibility chain; each level only has to contain the base field).
    Per level the E-orbit of each representative is examined either through
    the full orbit partition of the level group or, when that group is over
    the cap, through an exact Levi-transporter membership test.  The merge is
    called stable when the last two accumulated counts agree; an unstable
    merge is reported, never coerced.
    """
    flavor = flavor.upper()
    levels = tuple(int(x) for x in levels)
    if not levels or list(levels) != sorted(levels) or len(set(levels)) != len(levels):
        raise UsageError("levels must be a strictly ascending nonempty list")
    base_level = levels[0]
    for lv in levels[1:]:
        if lv % base_level:
            raise UsageError(
                f"every tower level must be a multiple of the base level {base_level}"
            )
    base = orbit_partition(spec, flavor, base_level, cap)
    base_reps_idx = [int(np.flatnonzero(base.orbit_id == k)[0]) for k in range(base.n_orbits)]
    base_rep_mats = [
        tuple(tuple(int(x) for x in row) for row in base.group.mats[i]) for i in base_reps_idx
    ]

    uf = _UnionFind(base.n_orbits)
    merged_counts = [base.n_orbits]
    methods = ["partition"]
    for level in levels[1:]:
        F_lv = spec.field_at(level)
        emb = base.group.field.embedding_table(F_lv)
        reps_lv = [
            tuple(tuple(int(emb[x]) for x in row) for row in m) for m in base_rep_mats
        ]
        try:
            top = orbit_partition(spec, flavor, level, cap)
            ids = [top.orbit_of_matrix(m) for m in reps_lv]
            for i in range(base.n_orbits):
                for j in range(i + 1, base.n_orbits):
                    if ids[i] == ids[j]:
                        uf.union(i, j)
            methods.append("partition")
        except ResourceCapError:
            ctx = transporter_context(spec, flavor, F_lv, levi_cap=levi_cap)
            for i in range(base.n_orbits):
                for j in range(i + 1, base.n_orbits):
                    if uf.find(i) != uf.find(j) and ctx.member(reps_lv[i], reps_lv[j]):
                        uf.union(i, j)
            methods.append("transporter")
        merged_counts.append(len(set(uf.find(i) for i in range(base.n_orbits))))
    merged_classes = uf.classes()
    rep_classes = {
        word: merged_classes[oid] for word, oid in base.representative_labels.items()
    }
    expected = len(coset_system(spec.weyl_system(), spec.type_subset).left_reps)
    stable = len(merged_counts) >= 2 and merged_counts[-1] == merged_counts[-2]
    reps_distinct = len(set(rep_classes.values())) == len(rep_classes)
    return MergeReport(
        spec,
        flavor,
        levels,
        base.n_orbits,
        tuple(merged_counts),
        expected,
        merged_classes,
        rep_classes,
        stable,
        reps_distinct,
        tuple(methods),
    )


# -- Lang map -----------------------------------------------------------------


def lang_map(spec: FqGroupSpec, h, level: int = 1) -> tuple:
    """h -> h phi(h)^{-1}, phi the entrywise p-power map."""
    F = spec.field_at(level)
    return mat_mul(F, h, mat_inv(F, mat_frob(F, h)))


# -- flag variety enumeration -------------------------------------------------


def gaussian_binomial(n: int, k: int, q: int) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def flag_count(q: int, blocks) -> int:
    total = 1
    remaining = sum(blocks)
    for b in blocks[:-1]:
        total *= gaussian_binomial(remaining, b, q)
        remaining -= b
    return total


def enumerate_flag_representatives(F: Fq, n: int, blocks, cap: int | None = None):
    """One invertible representative h per coset of P_- \\ H.

    The coset of h is the flag of row spans V_b = rowspan(h[:c_b]); the
    representatives enumerate every flag of the block type exactly once.
    """
    total = flag_count(F.q, blocks)
    cap = _group_cap(cap)
    if total > cap:
        raise ResourceCapError(f"flag variety has {total} points, over the cap {cap}")
    reps = []

    def rec(rows_so_far, free_cols, remaining_blocks):
        if len(remaining_blocks) == 1:
            completion = [[1 if j == c else 0 for j in range(n)] for c in free_cols]
            mat = tuple(tuple(r) for r in rows_so_far + completion)
            reps.append(mat)
            return
        d = remaining_blocks[0]
        m = len(free_cols)
        for pivots in itertools.combinations(range(m), d):
            free = [
                (r, c)
                for r in range(d)
                for c in range(m)
                if c > pivots[r] and c not in pivots
            ]
            for values in itertools.product(F.elements(), repeat=len(free)):
                block_rows = [[0] * n for _ in range(d)]
                for r, p in enumerate(pivots):
                    block_rows[r][free_cols[p]] = 1
                for (r, c), v in zip(free, values):
                    block_rows[r][free_cols[c]] = v
                next_free = [free_cols[c] for c in range(m) if c not in pivots]
                rec(rows_so_far + block_rows, next_free, remaining_blocks[1:])

    rec([], list(range(n)), list(blocks))
    if len(reps) != total:
        raise ConfigurationError(
            f"flag enumeration produced {len(reps)} representatives, expected {total}"
        )
    return reps


# -- rational orbit membership (transporter over the Levi) --------------------


@dataclass
class TransporterContext:
    """Everything needed to test x in E(F) . r by quantifying over the Levi.

    x = (l u) r (phi(l) v)^{-1} for some unipotents iff l^{-1} x phi(l) lies in
    U_P r U_Q, which is checked for every Levi element l at once.
    """

    F: Fq
    levi_inv: np.ndarray  # (L, n, n)
    levi_frob: np.ndarray  # (L, n, n)
    u_q: list  # all elements of U_Q
    p_strict: np.ndarray  # bool mask of allowed strictly-off-diagonal U_P entries

    def member(self, x, rep) -> bool:
        F = self.F
        rep_inv = np.asarray(mat_inv(F, rep), np.uint8)
        y = bmatmul(F, self.levi_inv, np.asarray(x, np.uint8))
        y = bmatmul(F, y, self.levi_frob)
        n = y.shape[-1]
        diag = np.eye(n, dtype=bool)
        forbidden = ~self.p_strict & ~diag
        for v in self.u_q:
            right = bmatmul(F, np.asarray(v, np.uint8), rep_inv)
            z = bmatmul(F, y, right)
            ok = (z[:, diag] == 1).all(axis=1) & (z[:, forbidden] == 0).all(axis=1)
            if ok.any():
                return True
        return False


def transporter_context(
    spec: FqGroupSpec,
    flavor: str,
    F: Fq,
    blocks: tuple[int, ...] | None = None,
    levi_cap: int | None = None,
) -> TransporterContext:
    real = realisation(spec, flavor, blocks)
    levi = _levi_elements(spec, real.blocks, F, cap=levi_cap)
    levi_arr = np.array(levi, dtype=np.uint8)
    levi_inv = np.array([mat_inv(F, m) for m in levi], dtype=np.uint8)
    levi_frob = bfrob(F, levi_arr)
    u_q = _unipotent_elements(F, spec.n, real.u_positions(real.q_mask()))
    n = spec.n
    levi_mask = real.levi_mask()
    p_strict = real.p_mask() & ~levi_mask
    return TransporterContext(F, levi_inv, levi_frob, u_q, p_strict)


# -- fine Deligne-Lusztig strata counts ---------------------------------------


@dataclass
class DLStrataReport:
    spec: FqGroupSpec
    m: int
    labels: tuple  # reduced words of {}^{I_-} W, sorted by (length, word)
    lengths: dict  # word -> l(w)
    counts: dict  # word -> point count
    unresolved: int
    total: int
    flag_total: int
    label_levels: tuple[int, ...]
    by_elimination: int = 0
    by_transporter: int = 0

    @property
    def conclusive(self) -> bool:
        return self.unresolved == 0

    @property
    def all_labels_populated(self) -> bool:
        return all(self.counts[w] > 0 for w in self.labels)


def dl_strata_counts(
    spec: FqGroupSpec,
    m: int,
    flavor: str = "DL",
    label_levels=None,
    cap: int | None = None,
    levi_cap: int | None = None,
) -> DLStrataReport:
    """Point counts of the fine DL strata of P_- \\ H over F_{q^m}.

    Each coset P_- h maps to x = y~^{-1} (h phi(h)^{-1}) z~ where y = {}^I w0
    and z = phi(y); x is then labelled by the coset representative w in
    {}^{I_-} W whose geometric orbit contains it.  Two exact certificates are
    combined per point:

    * elimination -- the coarse double coset of x (Bruhat relative position)
      is an orbit invariant, and the stratum of w lies inside the coarse
      double coset of w; when exactly one candidate label shares the coset of
      x, that label is forced;
    * transporter -- x in E(F_{q^M}) . w~ is decided exactly by quantifying
      over the Levi at the smallest workable M in `label_levels` (multiples
      of m, default [m, 2m, 3m, 6m] filtered by the field bound).

    A coset certified by neither is counted as unresolved and the report is
    marked inconclusive; a wrong label cannot be produced.
    """
    if flavor.upper() != "DL":
        raise UsageError("strata counts are defined for the DL flavor")
    F = spec.field_at(m)
    n = spec.n
    blocks = spec.blocks
    rs = spec.weyl_system()
    I = spec.type_subset
    I_minus = opposite_type(rs, I)
    variant_blocks = tuple(reversed(blocks))
    variant_spec = FqGroupSpec(
        spec.family, n, spec.field, _weights_for_blocks(variant_blocks)
    )
    assert variant_spec.type_subset == I_minus

    cs_i = coset_system(rs, I)
    y = cs_i.upper_I_w0  # {}^I w0 = w0^{I_-}
    z = y  # phi(y) with split Frobenius
    y_inv_mat = mat_inv(F, _group_representative(spec, y, F))
    z_mat = _group_representative(spec, z, F)

    labels_w = coset_system(rs, I_minus).left_reps
    label_words = tuple(w.reduced_word() for w in labels_w)
    lengths = {w.reduced_word(): w.length for w in labels_w}
    label_dc = {
        w: min_double_coset_rep(rs, w, I_minus, I_minus) for w in labels_w
    }

    if label_levels is None:
        label_levels = [
            m * k for k in (1, 2, 3, 6) if spec.field.q ** (m * k) <= MAX_Q
        ]
    label_levels = tuple(sorted(set(label_levels)))
    if not label_levels or label_levels[0] != m or any(lv % m for lv in label_levels):
        raise UsageError(f"label levels must be multiples of m starting at m, got {label_levels}")

    contexts = []
    for lv in label_levels:
        F_lv = spec.field_at(lv)
        try:
            ctx = transporter_context(variant_spec, "DL", F_lv, levi_cap=levi_cap)
        except ResourceCapError:
            continue
        emb = F.embedding_table(F_lv) if lv != m else None
        reps = {
            w.reduced_word(): _group_representative(variant_spec, w, F_lv)
            for w in labels_w
        }
        contexts.append((lv, ctx, emb, reps))

    cosets = enumerate_flag_representatives(F, n, blocks, cap)
    counts = {word: 0 for word in label_words}
    unresolved = 0
    n_elim = n_trans = 0
    for h in cosets:
        x = mat_mul(F, mat_mul(F, y_inv_mat, lang_map(spec, h, m)), z_mat)
        x_dc = min_double_coset_rep(
            rs, weyl_from_one_line(rs, bruhat_cell(F, x)), I_minus, I_minus
        )
        candidates = [w for w in labels_w if label_dc[w] == x_dc]
        if not candidates:
            raise ConsistencyError(
                "coset point lies in no candidate label's coarse double coset"
            )
        found = None
        if len(candidates) == 1:
            found = candidates[0].reduced_word()
            n_elim += 1
        else:
            by_length_desc = sorted(candidates, key=lambda w: -w.length)
            for lv, ctx, emb, reps in contexts:
                x_lv = (
                    tuple(tuple(int(emb[e]) for e in row) for row in x)
                    if emb is not None
                    else x
                )
                for w in by_length_desc:
                    if ctx.member(x_lv, reps[w.reduced_word()]):
                        found = w.reduced_word()
                        n_trans += 1
                        break
                if found is not None:
                    break
        if found is None:
            unresolved += 1
        else:
            counts[found] += 1
    return DLStrataReport(
        spec,
        m,
        label_words,
        lengths,
        counts,
        unresolved,
        sum(counts.values()) + unresolved,
        flag_count(F.q, blocks),
        label_levels,
        n_elim,
        n_trans,
    )


def _weights_for_blocks(blocks: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for level, b in enumerate(blocks):
        out.extend([len(blocks) - level] * b)
    return tuple(out)
