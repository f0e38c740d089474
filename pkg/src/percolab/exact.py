"""Exact enumeration on tiny boxes: cluster-count moments and event probabilities
as integer-coefficient polynomials in the bond probability, plus the identity
checks built on them.

Everything here is exact: polynomial coefficients are Python integers obtained
by expanding p^o (1-p)^c terms, and pointwise checks run in Fraction arithmetic.
No result depends on floating point.

Identity checks provided:

* derivative identity -- d/dp E[M] = -sum over bonds of P(no bypass). This is
  the Margulis/Russo differentiation and holds exactly on every box.
* variance identity   -- Var(M) = (p(1-p)^2 + p^2(1-p)) * sum_b P(no bypass(b)).
  The report also carries the filtration form, Var(M) = sum_i E[D_i^2] with D_i
  the increments of the revealed-bond martingale E[M | first i bonds]. The two
  right-hand sides agree only when every no-bypass event is settled by earlier
  bonds (e.g. d=1); on boxes with cycles the conditional factor enters squared
  and the pivotal form overshoots. The report states both so callers can see
  which side holds.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .lattice import DEFAULT_ENUM_CAP, BoxSpec, EnumerationCapError


class IdentityViolationError(ValueError):
    """An exact polynomial identity check failed; carries the report."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"{report.name}: sides differ first at coefficient {report.first_mismatch} "
            f"({report.lhs.coeff(report.first_mismatch)} vs {report.rhs.coeff(report.first_mismatch)})"
        )


class Poly:
    """Polynomial in the bond probability with exact integer coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def zero(cls) -> "Poly":
        return cls()

    @classmethod
    def one(cls) -> "Poly":
        return cls((1,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return Poly(tuple(c * other for c in self.coeffs))
        out = [0] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    def derivative(self) -> "Poly":
        return Poly(tuple((i + 1) * c for i, c in enumerate(self.coeffs[1:])))

    def __call__(self, x):
        """Evaluate by Horner's rule; exact when x is a Fraction or int."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def coefficient_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]


@lru_cache(maxsize=None)
def bernoulli_weight(open_count: int, closed_count: int) -> Poly:
    """p^open (1-p)^closed expanded into the monomial basis."""
    coeffs = [0] * open_count + [comb(closed_count, j) * (-1) ** j for j in range(closed_count + 1)]
    return Poly(coeffs)


def prefactor_poly() -> Poly:
    """p(1-p)^2 + p^2(1-p); algebraically equal to p(1-p)."""
    return bernoulli_weight(1, 2) + bernoulli_weight(2, 1)


def poly_from_open_counts(counts, k: int) -> Poly:
    """sum_o counts[o] * p^o (1-p)^(k-o) as an exact polynomial."""
    total = Poly.zero()
    for o, c in enumerate(counts):
        if c:
            total = total + bernoulli_weight(o, k - o) * int(c)
    return total


def total_probability_poly(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP) -> Poly:
    """Probability mass over all configurations; the constant 1 by construction."""
    k = _capped_bond_count(spec, cap)
    return poly_from_open_counts([comb(k, o) for o in range(k + 1)], k)


# -- exhaustive sweep tables ---------------------------------------------------


def _capped_bond_count(spec: BoxSpec, cap: int) -> int:
    k = spec.bond_count
    if k > cap:
        raise EnumerationCapError(f"box has {k} bonds, over the enumeration cap of {cap}")
    return k


def _cluster_count_bits(parent: list, v1: list, v2: list, k: int, bits: int, vertices: int) -> int:
    # union-find with path halving over the open bonds of one configuration
    for v in range(vertices):
        parent[v] = v
    count = vertices
    for i in range(k):
        if not (bits >> i) & 1:
            continue
        x = v1[i]
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        y = v2[i]
        while parent[y] != y:
            parent[y] = parent[parent[y]]
            y = parent[y]
        if x != y:
            parent[x] = y
            count -= 1
    return count


def _no_bypass_bits(parent: list, v1: list, v2: list, k: int, bits: int, vertices: int, b: int) -> bool:
    for v in range(vertices):
        parent[v] = v
    for i in range(k):
        if i == b or not (bits >> i) & 1:
            continue
        x = v1[i]
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        y = v2[i]
        while parent[y] != y:
            parent[y] = parent[parent[y]]
            y = parent[y]
        if x != y:
            parent[x] = y
    x = v1[b]
    while parent[x] != x:
        x = parent[x]
    y = v2[b]
    while parent[y] != y:
        y = parent[y]
    return x != y


@lru_cache(maxsize=4)
def _sweep_tables(d: int, n: int, cap: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cluster counts M[bits], no-bypass indicators IG[bond, bits], popcounts."""
    spec = BoxSpec(d, n)
    k = _capped_bond_count(spec, cap)
    vertices = spec.vertex_count
    v1 = spec.bond_v1.tolist()
    v2 = spec.bond_v2.tolist()
    nconf = 1 << k
    counts = np.empty(nconf, dtype=np.int32)
    no_byp = np.empty((k, nconf), dtype=bool)
    parent = [0] * vertices
    for bits in range(nconf):
        counts[bits] = _cluster_count_bits(parent, v1, v2, k, bits, vertices)
    for b in range(k):
        row = no_byp[b]
        for bits in range(nconf):
            row[bits] = _no_bypass_bits(parent, v1, v2, k, bits, vertices, b)
    popcounts = np.array([bits.bit_count() for bits in range(nconf)], dtype=np.int8)
    return counts, no_byp, popcounts


# -- exact moments and event probabilities -------------------------------------


def mean_poly(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP) -> Poly:
    """E[cluster count] as an exact polynomial."""
    k = _capped_bond_count(spec, cap)
    counts, _, pc = _sweep_tables(spec.d, spec.n, cap)
    sums = [0] * (k + 1)
    for bits, m in enumerate(counts.tolist()):
        sums[pc[bits]] += m
    return poly_from_open_counts(sums, k)


def second_moment_poly(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP) -> Poly:
    k = _capped_bond_count(spec, cap)
    counts, _, pc = _sweep_tables(spec.d, spec.n, cap)
    sums = [0] * (k + 1)
    for bits, m in enumerate(counts.tolist()):
        sums[pc[bits]] += m * m
    return poly_from_open_counts(sums, k)


def variance_poly(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP) -> Poly:
    """Var(cluster count) as an exact polynomial; zero at p in {0, 1}."""
    mean = mean_poly(spec, cap)
    return second_moment_poly(spec, cap) - mean * mean


def no_bypass_poly(spec: BoxSpec, bond: int, cap: int = DEFAULT_ENUM_CAP) -> Poly:
    """P(no open bypass for the given bond) as an exact polynomial.

    The bond's own state never enters the event.
    """
    k = _capped_bond_count(spec, cap)
    _, no_byp, pc = _sweep_tables(spec.d, spec.n, cap)
    sums = [0] * (k + 1)
    for bits, hit in enumerate(no_byp[bond].tolist()):
        if hit:
            sums[pc[bits]] += 1
    return poly_from_open_counts(sums, k)


def martingale_square_sum_poly(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP,
                               order=None) -> Poly:
    """sum_i E[D_i^2] as an exact polynomial, D_i the increments of the
    revealed-bond martingale under the given reveal order (canonical default).

    D_i = s(state of bond i) * P(no bypass for bond i | bonds revealed before i)
    with s(open) = -(1-p), s(closed) = +p, so E[D_i^2] is the prefactor
    p(1-p)^2 + p^2(1-p) times the expected square of the conditional no-bypass
    probability. The total equals Var(M) for every reveal order.
    """
    k = _capped_bond_count(spec, cap)
    _, no_byp, _ = _sweep_tables(spec.d, spec.n, cap)
    order = tuple(range(k)) if order is None else tuple(int(i) for i in order)
    if sorted(order) != list(range(k)):
        raise ValueError("order must be a permutation of the bond indices")
    total = Poly.zero()
    for pos, b in enumerate(order):
        past = order[:pos]
        future = [x for x in order[pos + 1:]]
        row = no_byp[b]
        nf = len(future)
        for pbits in range(1 << pos):
            base = 0
            for t in range(pos):
                if (pbits >> t) & 1:
                    base |= 1 << past[t]
            g_counts = [0] * (nf + 1)
            for fbits in range(1 << nf):
                w = base
                o = 0
                for t in range(nf):
                    if (fbits >> t) & 1:
                        w |= 1 << future[t]
                        o += 1
                if row[w]:
                    g_counts[o] += 1
            g = poly_from_open_counts(g_counts, nf)
            total = total + bernoulli_weight(pbits.bit_count(), pos - pbits.bit_count()) * (g * g)
    return prefactor_poly() * total


# -- identity reports -----------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    """Two sides of an exact polynomial identity and whether they agree."""

    name: str
    ok: bool
    lhs: Poly
    rhs: Poly
    first_mismatch: int | None
    aux: dict

    def to_json_dict(self) -> dict:
        out = {
            "name": self.name,
            "ok": self.ok,
            "first_mismatch": self.first_mismatch,
            "lhs_coefficients": self.lhs.coefficient_strings(),
            "rhs_coefficients": self.rhs.coefficient_strings(),
        }
        for key, value in self.aux.items():
            out[key] = value.coefficient_strings() if isinstance(value, Poly) else value
        return out


def _first_mismatch(a: Poly, b: Poly) -> int | None:
    for i in range(max(len(a.coeffs), len(b.coeffs))):
        if a.coeff(i) != b.coeff(i):
            return i
    return None


def verify_russo_identity(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP,
                          strict: bool = True) -> IdentityReport:
    """Check d/dp E[M] = -sum_b P(no bypass(b)) as exact polynomials."""
    k = _capped_bond_count(spec, cap)
    lhs = mean_poly(spec, cap).derivative()
    rhs = Poly.zero()
    for b in range(k):
        rhs = rhs - no_bypass_poly(spec, b, cap)
    mismatch = _first_mismatch(lhs, rhs)
    report = IdentityReport("derivative_identity", mismatch is None, lhs, rhs, mismatch, {})
    if strict and not report.ok:
        raise IdentityViolationError(report)
    return report


def verify_variance_identity(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP,
                             strict: bool = True) -> IdentityReport:
    """Check Var(M) = (p(1-p)^2 + p^2(1-p)) * sum_b P(no bypass(b)) exactly.

    aux carries the filtration right-hand side sum_i E[D_i^2] (always equal to
    Var(M); `martingale_ok` confirms it) so a mismatch in the pivotal form can
    be told apart from an enumeration bug.
    """
    k = _capped_bond_count(spec, cap)
    lhs = variance_poly(spec, cap)
    acc = Poly.zero()
    for b in range(k):
        acc = acc + no_bypass_poly(spec, b, cap)
    rhs = prefactor_poly() * acc
    mart = martingale_square_sum_poly(spec, cap)
    mismatch = _first_mismatch(lhs, rhs)
    report = IdentityReport(
        "variance_identity",
        mismatch is None,
        lhs,
        rhs,
        mismatch,
        {"martingale_rhs": mart, "martingale_ok": mart == lhs},
    )
    if strict and not report.ok:
        raise IdentityViolationError(report)
    return report


# -- martingale increments -------------------------------------------------------


def _layered_means(counts: np.ndarray, k: int, q: Fraction) -> list[list[Fraction]]:
    """f[i][prefix_bits] = E[M | first i bonds == prefix], exact Fractions."""
    layers = [None] * (k + 1)
    layers[k] = [Fraction(int(m)) for m in counts.tolist()]
    for i in range(k - 1, -1, -1):
        nxt = layers[i + 1]
        bit = 1 << i
        layers[i] = [(1 - q) * nxt[pref] + q * nxt[pref | bit] for pref in range(1 << i)]
    return layers


def martingale_increments(spec: BoxSpec, p, config, cap: int = DEFAULT_ENUM_CAP) -> list[Fraction]:
    """Exact increments E[M | first i+1 bonds] - E[M | first i bonds] for one
    configuration, in canonical bond order. Their sum telescopes to
    M(config) - E[M]."""
    k = _capped_bond_count(spec, cap)
    counts, _, _ = _sweep_tables(spec.d, spec.n, cap)
    q = Fraction(p)
    bits = 0
    for i, state in enumerate(np.asarray(config.open_bonds, dtype=bool).tolist()):
        if state:
            bits |= 1 << i
    # conditional mean over the unrevealed suffix, one level at a time
    deltas = []
    prev = None
    for i in range(k + 1):
        mask = (1 << i) - 1
        prefix = bits & mask
        total = Fraction(0)
        suffixes = 1 << (k - i)
        for s in range(suffixes):
            w = prefix | (s << i)
            o = s.bit_count()
            total += q**o * (1 - q) ** (k - i - o) * int(counts[w])
        if prev is not None:
            deltas.append(total - prev)
        prev = total
    return deltas


@dataclass(frozen=True)
class MartingaleReport:
    """Exhaustive exact check of the martingale structure at one p."""

    p: Fraction
    bonds: int
    sum_ok: bool                      # increments telescope to M - E[M] on every config
    zero_mean_ok: bool                # conditional mean of each increment vanishes
    off_event_zero_violations: int    # increments != 0 where the bond has a bypass
    on_event_value_violations: int    # increments outside {+p, -(1-p)} where it has none
    second_moment: list[Fraction]     # per-bond E[D_i^2]
    pivotal_form: list[Fraction]      # prefactor * P(no bypass(b_i))
    conditional_form: list[Fraction]  # prefactor * E[(conditional no-bypass prob)^2]
    matches_pivotal: bool
    matches_conditional: bool
    matches_variance: bool            # sum of second moments == Var(M) at this p


def martingale_report(spec: BoxSpec, p, cap: int = DEFAULT_ENUM_CAP) -> MartingaleReport:
    """Sweep every configuration and bond, checking the martingale structure
    exactly at one value of p (use a Fraction for exact rational arithmetic)."""
    k = _capped_bond_count(spec, cap)
    counts, no_byp, pc = _sweep_tables(spec.d, spec.n, cap)
    q = Fraction(p)
    layers = _layered_means(counts, k, q)
    nconf = 1 << k

    weights = [q**o * (1 - q) ** (k - o) for o in range(k + 1)]

    sum_ok = True
    mean = layers[0][0]
    for bits in range(nconf):
        total = Fraction(0)
        for i in range(k):
            total += layers[i + 1][bits & ((1 << (i + 1)) - 1)] - layers[i][bits & ((1 << i) - 1)]
        if total != int(counts[bits]) - mean:
            sum_ok = False
            break

    zero_mean_ok = True
    for i in range(k):
        bit = 1 << i
        for pref in range(1 << i):
            d0 = layers[i + 1][pref] - layers[i][pref]
            d1 = layers[i + 1][pref | bit] - layers[i][pref]
            if (1 - q) * d0 + q * d1 != 0:
                zero_mean_ok = False
                break
        if not zero_mean_ok:
            break

    off_zero = 0
    on_value = 0
    plus, minus = q, -(1 - q)
    for bits in range(nconf):
        for i in range(k):
            delta = layers[i + 1][bits & ((1 << (i + 1)) - 1)] - layers[i][bits & ((1 << i) - 1)]
            if no_byp[i][bits]:
                if delta != plus and delta != minus:
                    on_value += 1
            elif delta != 0:
                off_zero += 1

    prefactor = q * (1 - q) ** 2 + q**2 * (1 - q)
    second = []
    pivotal = []
    conditional = []
    for i in range(k):
        bit = 1 << i
        acc = Fraction(0)
        for pref in range(1 << (i + 1)):
            delta = layers[i + 1][pref] - layers[i][pref & (bit - 1)]
            o = pref.bit_count()
            acc += q**o * (1 - q) ** (i + 1 - o) * delta * delta
        second.append(acc)
        prob = Fraction(0)
        for bits in range(nconf):
            if no_byp[i][bits]:
                prob += weights[pc[bits]]
        pivotal.append(prefactor * prob)
        # conditional no-bypass probability given the first i bonds, squared
        glayers_top = [Fraction(0)] * (1 << i)
        for pref in range(1 << i):
            g = Fraction(0)
            for s in range(1 << (k - i)):
                w = pref | (s << i)
                if no_byp[i][w]:
                    o = s.bit_count()
                    g += q**o * (1 - q) ** (k - i - o)
            glayers_top[pref] = g
        acc_g = Fraction(0)
        for pref in range(1 << i):
            o = pref.bit_count()
            acc_g += q**o * (1 - q) ** (i - o) * glayers_top[pref] ** 2
        conditional.append(prefactor * acc_g)

    var_at_p = variance_poly(spec, cap)(q)
    return MartingaleReport(
        p=q,
        bonds=k,
        sum_ok=sum_ok,
        zero_mean_ok=zero_mean_ok,
        off_event_zero_violations=off_zero,
        on_event_value_violations=on_value,
        second_moment=second,
        pivotal_form=pivotal,
        conditional_form=conditional,
        matches_pivotal=second == pivotal,
        matches_conditional=second == conditional,
        matches_variance=sum(second) == var_at_p,
    )
