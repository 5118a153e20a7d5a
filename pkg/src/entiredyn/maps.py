"""Built-in entire-function families, singular values and the bound K."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels as kr
from .errors import MapOverflow

FAMILY_CODES = {
    "expaffine": kr.EXP_AFFINE,
    "expshift": kr.EXP_SHIFT,
    "sine": kr.SINE,
    "cosine": kr.COSINE,
    "zexp": kr.ZEXP,
    "petalexp": kr.PETAL_EXP,
}

PARAM_NAMES = {
    "expaffine": ("lambda",),
    "expshift": ("kappa",),
    "sine": ("lambda",),
    "cosine": ("a", "b"),
    "zexp": (),
    "petalexp": (),
}

FORMULAS = {
    "expaffine": "lambda*(exp(z)-1)",
    "expshift": "exp(z)+kappa",
    "sine": "lambda*sin(z)",
    "cosine": "a*exp(z)+b*exp(-z)",
    "zexp": "z*exp(z)",
    "petalexp": "((z+1)*exp(z)-1)/4",
}

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EntireMap:
    """One member of a built-in family; ``params`` follow ``PARAM_NAMES``."""

    family: str
    params: tuple = ()

    def __post_init__(self):
        fam = self.family.lower().replace("_", "").replace("-", "")
        if fam not in FAMILY_CODES:
            raise ValueError(f"unknown family {self.family!r}; "
                             f"choose from {', '.join(FAMILY_CODES)}")
        params = tuple(complex(v) for v in self.params)
        names = PARAM_NAMES[fam]
        if len(params) != len(names):
            raise ValueError(f"{fam} takes {len(names)} parameter(s) "
                             f"({', '.join(names) or 'none'}), got {len(params)}")
        for name, v in zip(names, params):
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"parameter {name} must be finite")
        if fam in ("expaffine", "sine") and params[0] == 0:
            raise ValueError(f"{fam} with lambda=0 is constant")
        if fam == "cosine" and (params[0] == 0 or params[1] == 0):
            raise ValueError("cosine needs a != 0 and b != 0; "
                             "use expaffine/expshift for the one-sided case")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "params", params)

    @property
    def code(self) -> int:
        return FAMILY_CODES[self.family]

    @cached_property
    def p(self) -> np.ndarray:
        """Parameters packed for the compiled kernels."""
        out = np.zeros(2, np.complex128)
        out[: len(self.params)] = self.params
        return out

    def __call__(self, z):
        return evaluate(self, z)

    def __str__(self):
        return to_descriptor(self)


def exp_affine(lam: complex) -> EntireMap:
    return EntireMap("expaffine", (lam,))


def exp_shift(kappa: complex) -> EntireMap:
    return EntireMap("expshift", (kappa,))


def sine(lam: complex) -> EntireMap:
    return EntireMap("sine", (lam,))


def cosine(a: complex, b: complex) -> EntireMap:
    return EntireMap("cosine", (a, b))


def zexp() -> EntireMap:
    return EntireMap("zexp")


def petal_exp() -> EntireMap:
    return EntireMap("petalexp")


def golden_exp_affine() -> EntireMap:
    """lambda*(exp(z)-1) with lambda = exp(2 pi i theta), theta the golden mean."""
    return exp_affine(cmath.exp(2j * math.pi * GOLDEN_MEAN))


def golden_sine() -> EntireMap:
    return sine(cmath.exp(2j * math.pi * GOLDEN_MEAN))


def evaluate(m: EntireMap, z: complex) -> complex:
    z = complex(z)
    w = kr.f_eval(m.code, m.p, z)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise MapOverflow(f"f({z}) is not representable; iterate with BigPoint")
    return w


def derivative(m: EntireMap, z: complex) -> complex:
    z = complex(z)
    d = kr.f_deriv(m.code, m.p, z)
    if not (math.isfinite(d.real) and math.isfinite(d.imag)):
        raise MapOverflow(f"f'({z}) is not representable")
    return d


@dataclass(frozen=True)
class SingularValue:
    point: complex
    kind: str  # "critical" or "asymptotic"


@dataclass(frozen=True)
class SingularSet:
    values: tuple = field(default_factory=tuple)

    @property
    def points(self) -> list:
        return [s.point for s in self.values]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def singular_values(m: EntireMap) -> SingularSet:
    fam = m.family
    if fam == "expshift":
        vals = [(m.params[0], "asymptotic")]
    elif fam == "expaffine":
        vals = [(-m.params[0], "asymptotic")]
    elif fam == "sine":
        lam = m.params[0]
        vals = [(lam, "critical"), (-lam, "critical")]
    elif fam == "cosine":
        c = 2.0 * cmath.sqrt(m.params[0] * m.params[1])
        vals = [(c, "critical"), (-c, "critical")]
    elif fam == "zexp":
        # critical point -1, and f -> 0 along the negative real axis
        vals = [(complex(-1.0 / math.e), "critical"), (0j, "asymptotic")]
    else:
        # f' = (z+2) e^z / 4 vanishes only at -2; f -> -1/4 as Re z -> -inf
        vals = [(evaluate(m, -2.0), "critical"), (complex(-0.25), "asymptotic")]
    return SingularSet(tuple(SingularValue(complex(p), k) for p, k in vals))


def bound_K(m: EntireMap) -> float:
    s = max(abs(v.point) for v in singular_values(m))
    return 1.0 + max(abs(evaluate(m, 0.0)), s)


def _fmt_complex(v: complex) -> str:
    return f"{v.real!r},{v.imag!r}"


def to_descriptor(m: EntireMap) -> str:
    parts = [f"family={m.family}"]
    for name, v in zip(PARAM_NAMES[m.family], m.params):
        parts.append(f"{name}={_fmt_complex(v)}")
    return " ".join(parts)


def parse_complex(text: str) -> complex:
    """``re,im`` or a bare real; also accepts Python complex literals."""
    text = text.strip()
    if "," in text:
        re_s, im_s = text.split(",", 1)
        return complex(float(re_s), float(im_s))
    return complex(text.replace("i", "j"))


def parse_descriptor(text: str) -> EntireMap:
    fields = {}
    for tok in text.split():
        if "=" not in tok:
            raise ValueError(f"bad descriptor token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k.strip().lower()] = v
    if "family" not in fields:
        raise ValueError("descriptor needs family=<name>")
    fam = fields.pop("family").lower()
    if fam not in PARAM_NAMES:
        raise ValueError(f"unknown family {fam!r}")
    params = []
    for name in PARAM_NAMES[fam]:
        if name not in fields:
            raise ValueError(f"descriptor for {fam} needs {name}=<re>,<im>")
        params.append(parse_complex(fields.pop(name)))
    if fields:
        raise ValueError(f"unexpected descriptor fields: {', '.join(fields)}")
    return EntireMap(fam, tuple(params))
