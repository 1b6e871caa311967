"""Hamiltonian family constructors with exact analytic partial derivatives.

Every family member is a scalar map f applied to the base energy
H0(p, x) = p^2/2m + V(x):

    standard          f(E) = E
    cabbatonian j     f(E) = O_j exp(f_{j-1}(E)/O_j),  O_i = sign*m*lambda_i^2
    sigma             f(E) = C(E) exp(-C(E)/(m*sigma^2)),  C the cabbatonian map
    truncated_series  f(E) = sum_{k<=K} a^k E^k,  a^k = (1/k!)(sign/(m*lambda^2))^{k-1}
    power_base        f(E) = E^k

Partials follow by the chain rule: dH/dx = f'V', dH/dp = f' p/m,
d2H/dp2 = f'' (p/m)^2 + f'/m, d2H/dpdx = f'' (p/m) V'.  The chain factor f'
is kept as an explicit product of per-level exponentials so that large
factors cancel where possible.  Every exponential argument is guarded at
|arg| <= 50 per nesting level; nested exponentials blow past 1e300 otherwise
and a silent Inf would poison every residual downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .expressions import Potential

MAX_EXP_ARG = 50.0

FAMILIES = ("standard", "cabbatonian", "sigma", "truncated_series", "power_base")


class InvalidSpec(ValueError):
    """Family description violates its invariants."""


class OverflowRisk(ArithmeticError):
    """An exponential argument exceeded the per-level guard."""

    def __init__(self, message: str, level: int | None = None,
                 argument: float | None = None, time: float | None = None):
        super().__init__(message)
        self.level = level
        self.argument = argument
        self.time = time


@dataclass(frozen=True, slots=True)
class SystemParams:
    m: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.m, (int, float)) and math.isfinite(self.m) and self.m > 0):
            raise InvalidSpec(f"mass must be positive and finite, got {self.m!r}")


@dataclass(frozen=True, slots=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.p)):
            raise ValueError(f"phase point must be finite, got ({self.x!r}, {self.p!r})")


@dataclass(frozen=True, slots=True)
class HDerivs:
    """Value and partials of H at one phase point."""

    h: float
    hx: float
    hp: float
    hpp: float
    hpx: float


@dataclass(frozen=True)
class HamiltonianSpec:
    """Tagged description of one family member.

    sign selects the +/- branch; the default -1 gives the bounded branch
    whose large-lambda limit recovers the level below.
    """

    family: str
    j: int = 0
    lambdas: tuple[float, ...] = ()
    sigma: float | None = None
    sign: int = -1
    order: int | None = None      # truncation order K (truncated_series)
    exponent: int | None = None   # power k (power_base)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        self.validate()

    def validate(self):
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.sign not in (-1, 1):
            raise InvalidSpec(f"sign must be -1 or +1, got {self.sign!r}")
        for lam in self.lambdas:
            if not (math.isfinite(lam) and lam > 0):
                raise InvalidSpec(f"lambdas must be positive, got {self.lambdas}")
        if self.family == "standard":
            if self.j != 0 or self.lambdas:
                raise InvalidSpec("standard family has level 0 and no lambdas")
        elif self.family == "cabbatonian":
            if self.j < 1 or len(self.lambdas) != self.j:
                raise InvalidSpec(f"cabbatonian level {self.j} needs exactly {self.j} lambdas (>= 1)")
        elif self.family == "sigma":
            if self.j < 0 or len(self.lambdas) != self.j:
                raise InvalidSpec(f"sigma level {self.j} needs exactly {self.j} lambdas")
            if self.sigma is None or not (math.isfinite(self.sigma) and self.sigma > 0):
                raise InvalidSpec(f"sigma family needs a positive sigma, got {self.sigma!r}")
        elif self.family == "truncated_series":
            if len(self.lambdas) != 1:
                raise InvalidSpec("truncated_series needs exactly one lambda")
            if self.order is None or self.order < 0:
                raise InvalidSpec(f"truncated_series needs order K >= 0, got {self.order!r}")
        else:  # power_base
            if self.lambdas:
                raise InvalidSpec("power_base takes no lambdas")
            if self.exponent is None or self.exponent < 0:
                raise InvalidSpec(f"power_base needs exponent k >= 0, got {self.exponent!r}")
        if self.family != "sigma" and self.sigma is not None:
            raise InvalidSpec("sigma applies to the sigma family only")
        if self.family != "truncated_series" and self.order is not None:
            raise InvalidSpec("order applies to the truncated_series family only")
        if self.family != "power_base" and self.exponent is not None:
            raise InvalidSpec("exponent applies to the power_base family only")

    def describe(self) -> str:
        if self.family == "standard":
            return "standard"
        if self.family == "cabbatonian":
            lams = ",".join(f"{v:g}" for v in self.lambdas)
            return f"cabbatonian j={self.j} lam=[{lams}] sign={self.sign:+d}"
        if self.family == "sigma":
            lams = ",".join(f"{v:g}" for v in self.lambdas)
            return f"sigma j={self.j} lam=[{lams}] sigma={self.sigma:g} sign={self.sign:+d}"
        if self.family == "truncated_series":
            return f"truncated_series K={self.order} lam={self.lambdas[0]:g} sign={self.sign:+d}"
        return f"power_base k={self.exponent}"

    def to_dict(self, m: float | None = None) -> dict:
        d: dict = {"family": self.family, "sign": self.sign}
        if self.family in ("cabbatonian", "sigma"):
            d["j"] = self.j
            d["lambdas"] = list(self.lambdas)
        if self.family == "sigma":
            d["sigma"] = self.sigma
        if self.family == "truncated_series":
            d["lambdas"] = list(self.lambdas)
            d["order"] = self.order
        if self.family == "power_base":
            d["exponent"] = self.exponent
        if m is not None:
            d["m"] = m
        return d

    @staticmethod
    def from_dict(d: dict) -> tuple["HamiltonianSpec", float | None]:
        """Build a spec from its JSON object form; returns (spec, m or None)."""
        if not isinstance(d, dict):
            raise InvalidSpec(f"spec must be a JSON object, got {type(d).__name__}")
        family = d.get("family")
        if not isinstance(family, str):
            raise InvalidSpec("spec is missing the 'family' string")
        family = family.lower()
        lambdas = d.get("lambdas", ())
        if not isinstance(lambdas, (list, tuple)):
            raise InvalidSpec("'lambdas' must be a list")
        try:
            lambdas = tuple(float(v) for v in lambdas)
            default_j = len(lambdas) if family in ("cabbatonian", "sigma") else 0
            j = int(d.get("j", default_j))
            sign = int(d.get("sign", -1))
            sigma = d.get("sigma")
            sigma = float(sigma) if sigma is not None else None
            order = d.get("order")
            order = int(order) if order is not None else None
            exponent = d.get("exponent")
            exponent = int(exponent) if exponent is not None else None
            m = d.get("m")
            m = float(m) if m is not None else None
        except (TypeError, ValueError) as exc:
            raise InvalidSpec(f"bad spec field: {exc}") from exc
        spec = HamiltonianSpec(family=family, j=j, lambdas=lambdas, sigma=sigma,
                               sign=sign, order=order, exponent=exponent)
        return spec, m


def _guarded_exp(z: float, level: int) -> float:
    if not abs(z) <= MAX_EXP_ARG:
        raise OverflowRisk(
            f"exponential argument {z:.6g} exceeds the +/-{MAX_EXP_ARG:g} guard at nesting level {level}",
            level=level, argument=z)
    return math.exp(z)


def base_energy(params: SystemParams, pot: Potential, pt: PhasePoint) -> float:
    """H0 = p^2/2m + V(x)."""
    return pt.p * pt.p / (2.0 * params.m) + pot.value(pt.x)


def _scalar_map(spec: HamiltonianSpec, params: SystemParams, e0: float):
    """(f, f', f'') of the family's scalar map evaluated at base energy e0."""
    m, s = params.m, spec.sign
    if spec.family == "standard":
        return e0, 1.0, 0.0
    if spec.family in ("cabbatonian", "sigma"):
        value = e0
        fp = 1.0
        curvature = 0.0
        for i, lam in enumerate(spec.lambdas, start=1):
            omega = s * m * lam * lam
            grow = _guarded_exp(value / omega, i)
            value = omega * grow
            curvature += fp / omega
            fp *= grow
        fpp = fp * curvature
        if spec.family == "sigma":
            w = m * spec.sigma * spec.sigma
            damp = _guarded_exp(-value / w, len(spec.lambdas) + 1)
            g = value * damp
            gp = (1.0 - value / w) * damp
            gpp = (value / w - 2.0) / w * damp
            return g, gp * fp, gpp * fp * fp + gp * fpp
        return value, fp, fpp
    if spec.family == "truncated_series":
        coeffs = series_coeffs(1, spec.lambdas[0], m, s, spec.order).coeffs
        top = len(coeffs) - 1
        f = 0.0
        for a in reversed(coeffs):
            f = f * e0 + a
        fp = 0.0
        for k in range(top, 0, -1):
            fp = fp * e0 + k * coeffs[k]
        fpp = 0.0
        for k in range(top, 1, -1):
            fpp = fpp * e0 + k * (k - 1) * coeffs[k]
        return f, fp, fpp
    k = spec.exponent
    f = e0 ** k
    fp = k * e0 ** (k - 1) if k >= 1 else 0.0
    fpp = k * (k - 1) * e0 ** (k - 2) if k >= 2 else 0.0
    return f, fp, fpp


def eval_h(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
           pt: PhasePoint) -> float:
    """Energy of the family member at one phase point."""
    f, _, _ = _scalar_map(spec, params, base_energy(params, pot, pt))
    if not math.isfinite(f):
        raise OverflowRisk(f"non-finite energy for {spec.describe()}")
    return f


def eval_derivs(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
                pt: PhasePoint) -> HDerivs:
    """Value and analytic first/second partials via the recursive chain rule."""
    f, fp, fpp = _scalar_map(spec, params, base_energy(params, pot, pt))
    vprime = pot.gradient(pt.x)
    w = pt.p / params.m
    derivs = HDerivs(h=f, hx=fp * vprime, hp=fp * w,
                     hpp=fpp * w * w + fp / params.m, hpx=fpp * w * vprime)
    for field in (derivs.h, derivs.hx, derivs.hp, derivs.hpp, derivs.hpx):
        if not math.isfinite(field):
            raise OverflowRisk(f"non-finite partial derivative for {spec.describe()}")
    return derivs


def chain_factor(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
                 energy0: float) -> float:
    """dH/dH0 at base energy level energy0 (1 for the standard family).

    The map depends on the base-energy level only; pot is accepted for
    interface symmetry with eval_h/eval_derivs.
    """
    _, fp, _ = _scalar_map(spec, params, energy0)
    if not math.isfinite(fp):
        raise OverflowRisk(f"non-finite chain factor for {spec.describe()}")
    return fp


@dataclass(frozen=True)
class CoeffTable:
    """Power-series coefficients of a family member in the base energy."""

    coeffs: tuple[float, ...]
    j: int
    lambdas: tuple[float, ...]
    m: float
    sign: int

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def value_at(self, e0: float) -> float:
        acc = 0.0
        for a in reversed(self.coeffs):
            acc = acc * e0 + a
        return acc


def series_coeffs(j: int, lambda1: float, m: float, sign: int, order: int) -> CoeffTable:
    """Level-1 expansion coefficients a^k = (1/k!)(sign/(m*lambda1^2))^{k-1}.

    The k=0 term equals sign*m*lambda1^2 and a^1 = 1 exactly.  Higher levels
    have no closed form here; build them with compose_series.
    """
    if j != 1:
        raise InvalidSpec("closed-form coefficients exist at level 1 only; use compose_series")
    if not (lambda1 > 0):
        raise InvalidSpec(f"lambda1 must be positive, got {lambda1!r}")
    if order < 0:
        raise InvalidSpec(f"order must be >= 0, got {order!r}")
    if sign not in (-1, 1):
        raise InvalidSpec(f"sign must be -1 or +1, got {sign!r}")
    base = sign / (m * lambda1 * lambda1)
    coeffs = tuple(base ** (k - 1) / math.factorial(k) for k in range(order + 1))
    return CoeffTable(coeffs=coeffs, j=1, lambdas=(lambda1,), m=m, sign=sign)


def compose_series(inner: CoeffTable, lambda_next: float, m: float, sign: int,
                   order: int) -> CoeffTable:
    """Coefficients of sign*m*lambda^2 * exp(sign*inner/(m*lambda^2)), truncated.

    Exact Taylor composition at the truncation order; implements the level
    j+1 coefficients from the level-j table.
    """
    if inner.order < order:
        raise InvalidSpec(f"inner table of order {inner.order} cannot support order {order}")
    if not (lambda_next > 0):
        raise InvalidSpec(f"lambda must be positive, got {lambda_next!r}")
    omega = sign * m * lambda_next * lambda_next
    w = [c / omega for c in inner.coeffs[:order + 1]]
    # exp of a power series: split the constant, then the standard recurrence
    scale = omega * _guarded_exp(w[0], inner.j + 1)
    c = [1.0] + [0.0] * order
    for n in range(1, order + 1):
        c[n] = sum(k * w[k] * c[n - k] for k in range(1, n + 1)) / n
    return CoeffTable(coeffs=tuple(scale * cn for cn in c), j=inner.j + 1,
                      lambdas=inner.lambdas + (float(lambda_next),), m=m, sign=sign)


def pascal_row(k: int) -> list[int]:
    """Row k of the Pascal triangle as exact integers, 0 <= k <= 60."""
    if k < 0:
        raise InvalidSpec(f"row index must be >= 0, got {k}")
    if k > 60:
        raise OverflowRisk(f"row {k} exceeds the exact 64-bit range margin (k <= 60)")
    return [math.comb(k, i) for i in range(k + 1)]


def sierpinski_mask(rows: int) -> list[list[int]]:
    """Parity of the Pascal triangle (odd = 1) via the XOR parent recurrence."""
    if rows < 1:
        raise InvalidSpec(f"need at least one row, got {rows}")
    mask = [[1]]
    for n in range(1, rows):
        prev = mask[-1]
        mask.append([1] + [prev[i - 1] ^ prev[i] for i in range(1, n)] + [1])
    return mask
