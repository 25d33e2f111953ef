"""Suite configuration: dotted-key text files plus programmatic defaults."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .catalog import DEFAULT_COEFFS, near_round_coeffs

ALL_CHECKS = (
    "disjoint",
    "split",
    "capped",
    "transversal",
    "lift",
    "linking",
    "word",
)


class ConfigError(ValueError):
    """Malformed configuration text or values."""


@dataclass(frozen=True)
class SuiteConfig:
    """Resolved parameters for one verification suite run."""

    i: int = 1
    j: int = 0
    n: int = 3
    eps: float | None = None
    coeffs: tuple | None = None
    seed: int = 1
    mc_samples: int = 0          # 0 = automatic per ambient dimension
    mc_seeds: int = 1
    preimage_starts: int = 256
    dist_budget: int = 64
    checks: tuple = ALL_CHECKS
    word_height: float = 2.2
    word_rho_in: float = 2.2
    word_rho_out: float = 2.8
    figures: bool = True
    parallel: bool = False

    def resolved_coeffs(self) -> tuple:
        if self.eps is not None and self.coeffs is not None:
            raise ConfigError("give either eps or explicit coeffs, not both")
        if self.eps is not None:
            return near_round_coeffs(self.eps)
        if self.coeffs is not None:
            return tuple(float(c) for c in self.coeffs)
        return DEFAULT_COEFFS

    def resolved_samples(self) -> int:
        if self.mc_samples:
            return int(self.mc_samples)
        base = 2_000_000 if self.n <= 4 else 4_000_000
        if self.eps is not None:
            base *= 2
        return base

    def echo(self) -> dict:
        """Configuration echo for the report, in fixed field order."""
        return {
            "family": {"i": self.i, "j": self.j, "n": self.n,
                       "coeffs": list(self.resolved_coeffs())},
            "seed": self.seed,
            "mc_samples": self.resolved_samples(),
            "preimage_starts": self.preimage_starts,
            "dist_budget": self.dist_budget,
            "checks": list(self.checks),
            "word": {"height": self.word_height,
                     "rho_in": self.word_rho_in,
                     "rho_out": self.word_rho_out},
        }


_KEY_MAP = {
    "family.i": ("i", int),
    "family.j": ("j", int),
    "family.n": ("n", int),
    "family.eps": ("eps", float),
    "family.coeffs": ("coeffs", "floats"),
    "seed": ("seed", int),
    "mc.samples": ("mc_samples", int),
    "mc.seeds": ("mc_seeds", int),
    "preimage.starts": ("preimage_starts", int),
    "dist.budget": ("dist_budget", int),
    "checks": ("checks", "checks"),
    "word.height": ("word_height", float),
    "word.rho_in": ("word_rho_in", float),
    "word.rho_out": ("word_rho_out", float),
    "figures": ("figures", "bool"),
    "parallel": ("parallel", "bool"),
}


def _convert(kind, raw: str, key: str):
    raw = raw.strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "floats":
            return tuple(float(x) for x in raw.split(","))
        if kind == "checks":
            if raw == "all":
                return ALL_CHECKS
            names = tuple(x.strip() for x in raw.split(",") if x.strip())
            bad = [x for x in names if x not in ALL_CHECKS]
            if bad:
                raise ConfigError(f"unknown checks {bad}; valid: {ALL_CHECKS}")
            return names
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    raise ConfigError(f"unhandled kind for {key}")


def parse_config_text(text: str) -> dict:
    """Parse flat dotted-key assignments; unknown keys are rejected."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEY_MAP:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, kind = _KEY_MAP[key]
        values[attr] = _convert(kind, raw, key)
    return values


def load_config(path) -> SuiteConfig:
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    return SuiteConfig(**values)


def merge_config(base: SuiteConfig, **overrides) -> SuiteConfig:
    """Apply non-None overrides onto a base configuration."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    known = {f.name for f in fields(SuiteConfig)}
    bad = set(clean) - known
    if bad:
        raise ConfigError(f"unknown config fields {sorted(bad)}")
    return replace(base, **clean)
