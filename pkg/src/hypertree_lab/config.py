"""Experiment configuration: parsing a key=value file, validation against module caps."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

from sympy import isprime

from .dpp import EXACT_MAX_N, SIZE_CAP
from .cosystole import COSET_MAX_N
from .moments import OVERLAP_MAX_N
from .oracle import ORACLE_NS

SUBCOMMANDS = (
    "sample", "census", "moments", "spectrum", "cosystole",
    "verify-kalai", "verify-lemma9", "overlaps", "inclusion",
)

# allowed --mode values per subcommand; the first entry is the default
MODES = {
    "sample": ("auto", "deflate", "rejection", "exact"),
    "census": ("auto", "deflate", "rejection"),
    "moments": ("auto", "exact", "log"),
    "spectrum": ("float",),
    "cosystole": ("upper", "exact"),
    "verify-kalai": ("exact",),
    "verify-lemma9": ("auto", "exact", "log"),
    "overlaps": ("exact",),
    "inclusion": ("float",),
}

INCLUSION_MAX_N = 12
SPECTRUM_MIN_N = 16


class ConfigError(ValueError):
    """Invalid experiment configuration."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name
        self.message = message


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    n: int = 12
    h: int = 1
    p: int = 2
    trials: int = 100
    seed: int = 0
    mode: Optional[str] = None
    out: Optional[str] = None
    format: str = "jsonlines"
    k: int = 1          # overlap size for "overlaps", face-set count for "inclusion"
    groups: bool = False

    def resolved_mode(self) -> str:
        return self.mode if self.mode is not None else MODES[self.subcommand][0]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.resolved_mode()
        d.pop("out")
        return d

    def validate(self) -> "ExperimentConfig":
        """Raise ConfigError on the first violated precondition."""
        sc = self.subcommand
        if sc not in SUBCOMMANDS:
            raise ConfigError("subcommand", f"unknown subcommand {sc!r}")
        for name in ("n", "h", "p", "trials", "seed", "k"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(name, f"expected an integer, got {v!r}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed", "must lie in [0, 2^64)")
        if self.trials < 0:
            raise ConfigError("trials", "must be nonnegative")
        if self.h < 1:
            raise ConfigError("h", "must be >= 1")
        if self.format not in ("jsonlines", "csv"):
            raise ConfigError("format", f"unknown format {self.format!r}")
        mode = self.resolved_mode()
        if mode not in MODES[sc]:
            raise ConfigError("mode", f"{sc} accepts {'|'.join(MODES[sc])}, got {mode!r}")
        if not 4 <= self.n <= SIZE_CAP:
            raise ConfigError("n", f"must lie in [4, {SIZE_CAP}]")

        if sc == "sample" and mode == "exact" and self.n > EXACT_MAX_N:
            raise ConfigError("n", f"exact sampling limited to n <= {EXACT_MAX_N}")
        if sc == "census" and not isprime(self.p):
            raise ConfigError("p", f"{self.p} is not prime")
        if sc in ("moments", "spectrum", "overlaps", "verify-lemma9") and 5 * self.h >= self.n:
            raise ConfigError("h", "need 5h < n for a family of vertex-disjoint 5-cycles")
        if sc == "spectrum" and self.n < SPECTRUM_MIN_N:
            raise ConfigError("n", f"spectrum needs n >= {SPECTRUM_MIN_N}")
        if sc == "cosystole" and mode == "exact" and self.n > COSET_MAX_N:
            raise ConfigError("n", f"exact systole limited to n <= {COSET_MAX_N}")
        if sc in ("verify-kalai", "verify-lemma9") and self.n not in ORACLE_NS:
            raise ConfigError("n", f"oracle enumeration supports n in {ORACLE_NS}")
        if sc == "overlaps":
            if self.n > OVERLAP_MAX_N:
                raise ConfigError("n", f"overlaps limited to n <= {OVERLAP_MAX_N}")
            if not 0 <= self.k <= 5 * self.h:
                raise ConfigError("k", "overlap size must lie in [0, 5h]")
        if sc == "inclusion":
            if self.n > INCLUSION_MAX_N:
                raise ConfigError("n", f"inclusion limited to n <= {INCLUSION_MAX_N}")
            if self.k < 1:
                raise ConfigError("k", "need at least one face set")
        return self


_INT_FIELDS = {"n", "h", "p", "trials", "seed", "k"}


def parse_value(key: str, raw: str):
    names = {f.name for f in fields(ExperimentConfig)}
    if key not in names:
        raise ConfigError(key, "unknown config key")
    raw = raw.strip()
    if key in _INT_FIELDS:
        try:
            return int(raw, 0)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {raw!r}") from None
    if key == "groups":
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ConfigError(key, f"expected a boolean, got {raw!r}")
    return raw


def read_config_file(path) -> dict:
    """key=value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("config", f"line {lineno}: expected key=value")
            key, raw = line.split("=", 1)
            key = key.strip().replace("-", "_")
            out[key] = parse_value(key, raw)
    return out
