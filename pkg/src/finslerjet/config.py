"""JSON configuration for models and verification runs."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import expr as ex
from .errors import ConfigError, ExprSyntaxError, FinslerError
from .geometry import FinslerModel

KNOWN_CHECKS = (
    "concurrency",
    "fundamental",
    "fd-oracle",
    "lemma",
    "kropina-metric",
    "kropina-ell",
    "kropina-hbar",
    "kropina-cartan",
    "kropina-spray",
    "kropina-nonlinear",
    "barthel",
    "curvature",
    "berwald-horizontal",
    "berwald-vertical",
    "nondegeneracy",
    "projective",
    "not-concurrent",
    "ar-factorization",
    "fn-selftest",
)

# checks that need a concurrent phi and a Kropina exponent
KROPINA_CHECKS = frozenset({
    "lemma", "kropina-metric", "kropina-ell", "kropina-hbar", "kropina-cartan",
    "kropina-spray", "kropina-nonlinear", "barthel", "curvature", "berwald-horizontal",
    "berwald-vertical", "nondegeneracy", "projective", "not-concurrent", "ar-factorization",
})


@dataclass(frozen=True)
class SampleSpec:
    box: tuple            # 2n pairs (min, max), x's first
    count: int = 100
    seed: int = 0
    max_attempts: int = 100_000
    guard_margin: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "box", tuple((float(a), float(b)) for a, b in self.box))
        if self.count < 1:
            raise ConfigError("sample.count must be >= 1")
        for lo, hi in self.box:
            if not (lo <= hi) or abs(lo) == float("inf") or abs(hi) == float("inf"):
                raise ConfigError(f"bad sample interval [{lo}, {hi}]")


@dataclass(frozen=True)
class Tolerances:
    rel: float = 1e-6
    abs: float = 1e-12
    algebraic: float = 1e-8        # assemblies of closed forms (no 4th derivatives)
    concurrency: float = 1e-8
    cartan: float = 1e-10
    not_concurrent: float = 1e-3   # minimal h-residual for the hatted geometry
    projective: float = 1e-6       # minimal relative transverse part of G_hat - G
    fd: float = 1e-4
    selftest: float = 1e-9


@dataclass(frozen=True)
class ScanSpec:
    """Path t -> (x, cos t y0 + sin t y1) for the non-degeneracy scan."""

    x: tuple
    y0: tuple
    y1: tuple
    t_min: float = -1.0
    t_max: float = 1.0
    steps: int = 401
    det_small: float = 1e-4
    det_large: float = 1e-3
    d_small: float = 1e-4
    d_large: float = 0.1


@dataclass(frozen=True)
class Config:
    dimension: int
    metric: str
    vector_field: tuple = ()
    m: float = 2.0
    m_values: tuple = ()
    domain: tuple = ()
    sample: SampleSpec = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    checks: tuple = KNOWN_CHECKS
    sigma: int = 1
    phi_sign_normalization: bool = True
    name: str = ""
    scan: ScanSpec | None = None
    degeneracy_margin: float = 1e-2
    curvature_points: int = 25
    berwald_fields: int = 3
    fd_points: int = 5

    @property
    def exponents(self) -> tuple:
        return tuple(self.m_values) or (self.m,)

    def model(self) -> FinslerModel:
        return FinslerModel.from_strings(self.dimension, self.metric, self.vector_field,
                                         self.domain, self.m, self.name)

    def echo(self) -> dict:
        out = {"name": self.name, "dimension": self.dimension, "metric": self.metric,
               "vector_field": list(self.vector_field), "domain": list(self.domain),
               "m": self.m, "m_values": list(self.exponents), "sigma": self.sigma,
               "phi_sign_normalization": self.phi_sign_normalization,
               "sample": {"box": [list(p) for p in self.sample.box],
                          "count": self.sample.count, "seed": self.sample.seed,
                          "max_attempts": self.sample.max_attempts,
                          "guard_margin": self.sample.guard_margin},
               "degeneracy_margin": self.degeneracy_margin}
        if self.scan is not None:
            out["scan"] = asdict(self.scan)
        return out


def _exponent(v, what):
    try:
        m = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number, got {v!r}") from None
    if m in (0.0, -1.0):
        raise ConfigError(f"{what} must differ from 0 and -1, got {v!r}")
    return m


def _default_box(n):
    return tuple([(0.5, 1.5)] * n + [(0.5, 1.5)] * n)


def from_dict(data: dict) -> Config:
    """Validate a decoded JSON object; every problem raises :class:`ConfigError`."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {"dimension", "metric", "vector_field", "m", "m_values", "domain", "sample",
             "tolerances", "checks", "sigma", "phi_sign_normalization", "name", "scan",
             "degeneracy_margin", "curvature_points", "berwald_fields", "fd_points",
             "description"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    try:
        n = int(data["dimension"])
        metric = str(data["metric"])
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from None
    if n < 1:
        raise ConfigError("dimension must be >= 1")
    vf = tuple(str(s) for s in data.get("vector_field", ()))
    domain = tuple(str(s) for s in data.get("domain", ()))
    m = _exponent(data.get("m", 2.0), "m")
    m_values = tuple(_exponent(v, "m_values entry") for v in data.get("m_values", ()))

    for text in (metric, *vf, *domain):
        try:
            ex.parse(text, n)
        except ExprSyntaxError as exc:
            raise ConfigError(f"cannot parse {text!r}: {exc}") from exc

    s = dict(data.get("sample", {}))
    box = s.pop("box", None)
    box = _default_box(n) if box is None else tuple(tuple(p) for p in box)
    if len(box) != 2 * n or any(len(p) != 2 for p in box):
        raise ConfigError(f"sample.box needs {2 * n} [min, max] pairs")
    try:
        sample = SampleSpec(box, **s)
    except TypeError as exc:
        raise ConfigError(f"bad sample spec: {exc}") from None

    try:
        tol = Tolerances(**data.get("tolerances", {}))
    except TypeError as exc:
        raise ConfigError(f"bad tolerances: {exc}") from None

    checks = tuple(data.get("checks", KNOWN_CHECKS))
    bad = [c for c in checks if c not in KNOWN_CHECKS]
    if bad:
        raise ConfigError(f"unknown checks: {bad}")

    sigma = int(data.get("sigma", 1))
    if sigma not in (1, -1):
        raise ConfigError("sigma must be +1 or -1")

    scan = None
    if data.get("scan") is not None:
        try:
            scan = ScanSpec(**{k: tuple(v) if isinstance(v, list) else v
                               for k, v in data["scan"].items()})
        except TypeError as exc:
            raise ConfigError(f"bad scan spec: {exc}") from None
        if not (len(scan.x) == len(scan.y0) == len(scan.y1) == n):
            raise ConfigError("scan x, y0, y1 need one entry per dimension")

    cfg = Config(n, metric, vf, m, m_values, domain, sample, tol, checks, sigma,
                 bool(data.get("phi_sign_normalization", True)), str(data.get("name", "")),
                 scan, float(data.get("degeneracy_margin", 1e-2)),
                 int(data.get("curvature_points", 25)), int(data.get("berwald_fields", 3)),
                 int(data.get("fd_points", 5)))
    if set(checks) & KROPINA_CHECKS and len(vf) != n:
        raise ConfigError(f"checks {sorted(set(checks) & KROPINA_CHECKS)} need a vector field "
                          f"with {n} components")
    try:
        cfg.model()
    except FinslerError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(data)


def bundled_config_path(name: str) -> Path:
    """Path of a configuration shipped inside the package (e.g. ``example.json``)."""
    return Path(__file__).with_name("configs") / name
