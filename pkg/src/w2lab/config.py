"""Run settings: defaults that reproduce the acceptance suite, plus INI overrides.

The config file is plain key = value under named sections; every key maps
onto a field of one of the experiment/checker config dataclasses and is
coerced to that field's type.  Unknown sections or keys are usage errors
with the offending name in the message.  Defaults reproduce the full
verification suite, so running with no config file is the reference run.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .checks import CheckSuiteConfig
from .experiments import (
    HalfspaceConfig,
    LowerExperimentConfig,
    RateExperimentConfig,
    SamplerSpec,
)

DEFAULT_SEED = 20260810
N_GRID_DEFAULT = tuple(2**k for k in range(4, 13))


class UsageError(ValueError):
    """Malformed CLI input or config file (exit code 2)."""


def default_settings() -> "RunSettings":
    return RunSettings()


@dataclass(frozen=True)
class RunSettings:
    seed: int = DEFAULT_SEED
    workers: int = 1
    out_dir: str = "out"
    verbosity: int = 1
    calibration_m: int = 10**5
    check: CheckSuiteConfig = field(default_factory=CheckSuiteConfig)
    rate_d1: RateExperimentConfig = field(
        default_factory=lambda: RateExperimentConfig(
            sampler=SamplerSpec("rademacher_product", 1, 1.0),
            n_grid=N_GRID_DEFAULT,
            replicas=10,
            m=10**5,
            estimator="quantile_1d",
        )
    )
    rate_d2: RateExperimentConfig = field(
        default_factory=lambda: RateExperimentConfig(
            sampler=SamplerSpec("scaled_basis", 2, 2.0**0.5),
            n_grid=N_GRID_DEFAULT,
            replicas=3,
            m=3000,
            estimator="exact",
        )
    )
    lower_d1: LowerExperimentConfig = field(
        default_factory=lambda: LowerExperimentConfig(
            sampler=SamplerSpec("rademacher_product", 1, 1.0),
            n_grid=(64, 256, 1024, 4096),
            m_w2=10**5,
            m_proxy=2 * 10**5,
            estimator="quantile_1d",
        )
    )
    lower_d2: LowerExperimentConfig = field(
        default_factory=lambda: LowerExperimentConfig(
            sampler=SamplerSpec("scaled_basis", 2, 1.0),
            n_grid=(64, 256, 1024, 4096),
            m_w2=3000,
            m_proxy=2 * 10**5,
            estimator="exact",
        )
    )
    ci_d1: HalfspaceConfig = field(
        default_factory=lambda: HalfspaceConfig(
            sampler=SamplerSpec("rademacher_product", 1, 1.0),
            n_grid=N_GRID_DEFAULT,
            m=10**5,
            directions=16,
            estimator="quantile_1d",
        )
    )
    ci_d2: HalfspaceConfig = field(
        default_factory=lambda: HalfspaceConfig(
            sampler=SamplerSpec("scaled_basis", 2, 2.0**0.5),
            n_grid=N_GRID_DEFAULT,
            m=10**5,
            w2_m=3000,
            directions=16,
            estimator="exact",
        )
    )

    def with_seed(self, seed: int) -> "RunSettings":
        """Propagate one root seed into every sub-config."""
        return replace(
            self,
            seed=seed,
            check=replace(self.check, root_seed=seed),
            rate_d1=replace(self.rate_d1, root_seed=seed),
            rate_d2=replace(self.rate_d2, root_seed=seed + 1),
            lower_d1=replace(self.lower_d1, root_seed=seed + 2),
            lower_d2=replace(self.lower_d2, root_seed=seed + 3),
            ci_d1=replace(self.ci_d1, root_seed=seed + 4),
            ci_d2=replace(self.ci_d2, root_seed=seed + 5),
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def semantic_dict(self) -> dict:
        """Config echo without presentation fields (out dir, workers, verbosity).

        This is what gets hashed and embedded in artifacts: two runs that can
        produce different numbers must have different semantic dicts, and runs
        differing only in parallelism or destination must not.
        """
        d = dataclasses.asdict(self)
        for key in ("out_dir", "workers", "verbosity"):
            d.pop(key, None)
        return d


_INT_TUPLE_FIELDS = {"n_grid", "increment_ns"}


def _coerce(name: str, raw: str, current):
    if name in _INT_TUPLE_FIELDS or isinstance(current, tuple):
        parts = raw.replace(",", " ").split()
        return tuple(int(p) for p in parts)
    if isinstance(current, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def _parse_outcomes(raw: str) -> tuple:
    """Rows separated by '|', coordinates by spaces/commas."""
    rows = [r for r in raw.split("|") if r.strip()]
    return tuple(
        tuple(float(v) for v in row.replace(",", " ").split()) for row in rows
    )


def _apply_section(obj, section: str, items) -> object:
    sampler_keys = {}
    updates = {}
    names = {f.name for f in fields(obj)}
    for key, raw in items:
        if key in ("sampler", "kind"):
            sampler_keys["kind"] = raw.strip()
            continue
        if key in ("dim",):
            sampler_keys["dim"] = int(raw)
            continue
        if key in ("scale", "beta"):
            sampler_keys["scale"] = float(raw)
            continue
        if key == "outcomes":
            sampler_keys["outcomes"] = _parse_outcomes(raw)
            continue
        if key == "probs":
            sampler_keys["probs"] = tuple(
                float(v) for v in raw.replace(",", " ").split()
            )
            continue
        if key not in names:
            raise UsageError(f"unknown key {key!r} in section [{section}]")
        updates[key] = _coerce(key, raw, getattr(obj, key))
    if sampler_keys:
        if "sampler" not in names:
            raise UsageError(f"section [{section}] does not take a sampler block")
        base = obj.sampler
        updates["sampler"] = SamplerSpec(
            kind=sampler_keys.get("kind", base.kind),
            dim=sampler_keys.get("dim", base.dim),
            scale=sampler_keys.get("scale", base.scale),
            outcomes=sampler_keys.get("outcomes", base.outcomes),
            probs=sampler_keys.get("probs", base.probs),
        )
    return replace(obj, **updates)


def load_settings(path: Optional[str] = None, seed: Optional[int] = None,
                  workers: Optional[int] = None, out_dir: Optional[str] = None,
                  verbosity: Optional[int] = None) -> RunSettings:
    """Resolve settings: defaults <- config file <- CLI flags (strongest)."""
    settings = default_settings()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(path)
        if not read:
            raise UsageError(f"config file not found or unreadable: {path}")
        known = {
            "check": "check",
            "rate_d1": "rate_d1",
            "rate_d2": "rate_d2",
            "lower_d1": "lower_d1",
            "lower_d2": "lower_d2",
            "ci_d1": "ci_d1",
            "ci_d2": "ci_d2",
        }
        for section in parser.sections():
            if section == "run":
                for key, raw in parser.items(section):
                    if key == "seed":
                        settings = replace(settings, seed=int(raw))
                    elif key == "workers":
                        settings = replace(settings, workers=int(raw))
                    elif key == "out":
                        settings = replace(settings, out_dir=raw.strip())
                    elif key == "verbosity":
                        settings = replace(settings, verbosity=int(raw))
                    elif key == "calibration_m":
                        settings = replace(settings, calibration_m=int(raw))
                    else:
                        raise UsageError(f"unknown key {key!r} in section [run]")
            elif section in known:
                attr = known[section]
                try:
                    updated = _apply_section(
                        getattr(settings, attr), section, parser.items(section)
                    )
                except (TypeError, ValueError) as exc:
                    if isinstance(exc, UsageError):
                        raise
                    raise UsageError(f"bad value in section [{section}]: {exc}")
                settings = replace(settings, **{attr: updated})
            else:
                raise UsageError(f"unknown config section [{section}]")
    if seed is not None:
        settings = replace(settings, seed=seed)
    if workers is not None:
        settings = replace(settings, workers=workers)
    if out_dir is not None:
        settings = replace(settings, out_dir=out_dir)
    if verbosity is not None:
        settings = replace(settings, verbosity=verbosity)
    return settings.with_seed(settings.seed)
