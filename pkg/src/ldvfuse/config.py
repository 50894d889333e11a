"""Run configuration: a YAML mapping with strict key checking.

Every key is optional; an empty document yields the published defaults
(tau 2300, strides 4/8, run lengths 154/122, head 63, GOP 4, loss weights
1e-3 / 1e-4, 30-frame segments).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .codec import DegradationProfile, GopConfig
from .enhance import Enhancer, ExternalEnhancer, IdentityEnhancer, SmoothEnhancer, TrimAnalysisConfig
from .ensemble import TtaConfig
from .errors import ConfigError
from .fusion import FusionConfig, HeuristicConfig
from .metrics import LossWeights

SECTIONS = {
    "heuristic": {f.name for f in fields(HeuristicConfig)},
    "fusion": {"short_len", "intra_len", "head_len"},
    "tta": {"enabled", "elements", "average_chroma"},
    "trim": {"gaps", "start_shifts"},
    "gop": {"gop_size", "hierarchy_levels"},
    "degradation": {"intra_step", "inter_step", "level_steps", "block_size", "dither", "seed"},
    "loss": {f.name for f in fields(LossWeights)},
    "segment": {"length"},
    "enhancers": {"main", "intra"},
}
TOP_LEVEL = {"input", "gt", "output", "report", "report_path", "threads"} | set(SECTIONS)


@dataclass
class RunConfig:
    input: str | None = None
    gt: str | None = None
    output: str | None = None
    report: str | None = None
    report_path: str | None = None
    threads: int = 1
    heuristic: dict = field(default_factory=dict)
    fusion: dict = field(default_factory=dict)
    tta: dict = field(default_factory=dict)
    trim: dict = field(default_factory=dict)
    gop: dict = field(default_factory=dict)
    degradation: dict = field(default_factory=dict)
    loss: dict = field(default_factory=dict)
    segment: dict = field(default_factory=dict)
    enhancers: dict = field(default_factory=dict)

    # --- typed views ---------------------------------------------------

    def heuristic_config(self) -> HeuristicConfig:
        return _build(HeuristicConfig, self.heuristic, "heuristic")

    def fusion_config(self) -> FusionConfig:
        return _build(FusionConfig, dict(self.fusion, heuristic=self.heuristic_config()), "fusion")

    def tta_config(self) -> TtaConfig:
        opts = {k: v for k, v in self.tta.items() if k != "enabled"}
        if "elements" in opts:
            opts["elements"] = tuple(str(e).upper() for e in opts["elements"])
        return _build(TtaConfig, opts, "tta")

    @property
    def tta_enabled(self) -> bool:
        return bool(self.tta.get("enabled", False))

    def trim_config(self) -> TrimAnalysisConfig:
        opts = {k: tuple(v) for k, v in self.trim.items()}
        return _build(TrimAnalysisConfig, opts, "trim")

    def gop_config(self) -> GopConfig:
        return _build(GopConfig, self.gop, "gop")

    def degradation_profile(self) -> DegradationProfile:
        opts = dict(self.degradation)
        opts.pop("seed", None)
        inter = opts.pop("inter_step", None)
        if inter is not None:
            if "level_steps" in opts:
                raise ConfigError("degradation: give inter_step or level_steps, not both")
            opts["level_steps"] = {lvl: inter for lvl in self.gop_config().levels}
        return _build(DegradationProfile, opts, "degradation")

    @property
    def seed(self) -> int:
        return int(self.degradation.get("seed", 0))

    def loss_weights(self) -> LossWeights:
        return _build(LossWeights, self.loss, "loss")

    @property
    def segment_len(self) -> int:
        return int(self.segment.get("length", 30))

    def enhancer(self, role: str) -> Enhancer:
        return parse_enhancer(self.enhancers.get(role, "identity"))


def _build(cls, opts: dict, section: str):
    try:
        return cls(**opts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def parse_enhancer(spec) -> Enhancer:
    """``identity`` | ``smooth[:RADIUS[:STRENGTH]]`` | ``external:COMMAND``,
    or a mapping with ``kind`` plus ``radius``/``strength``/``command``."""
    if isinstance(spec, dict):
        spec = dict(spec)
        kind = spec.pop("kind", None)
        allowed = {"identity": set(), "smooth": {"radius", "strength"}, "external": {"command"}}
        if kind not in allowed:
            raise ConfigError(f"unknown enhancer kind {kind!r}")
        unknown = set(spec) - allowed[kind]
        if unknown:
            raise ConfigError(f"unknown keys for {kind} enhancer: {sorted(unknown)}")
        if kind == "identity":
            return IdentityEnhancer()
        if kind == "smooth":
            return _build(SmoothEnhancer, spec, "enhancer")
        if "command" not in spec:
            raise ConfigError("external enhancer needs a command")
        return ExternalEnhancer(spec["command"])
    if not isinstance(spec, str):
        raise ConfigError(f"cannot parse enhancer {spec!r}")
    kind, _, rest = spec.partition(":")
    if kind == "identity" and not rest:
        return IdentityEnhancer()
    if kind == "smooth":
        parts = [p for p in rest.split(":") if p] if rest else []
        try:
            radius = int(parts[0]) if parts else 1
            strength = float(parts[1]) if len(parts) > 1 else 0.5
        except ValueError:
            raise ConfigError(f"bad smooth enhancer spec {spec!r}") from None
        if len(parts) > 2:
            raise ConfigError(f"bad smooth enhancer spec {spec!r}")
        return _build(SmoothEnhancer, {"radius": radius, "strength": strength}, "enhancer")
    if kind == "external" and rest:
        return ExternalEnhancer(rest)
    raise ConfigError(f"unknown enhancer spec {spec!r}")


def config_from_mapping(doc) -> RunConfig:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    unknown = set(doc) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for name, allowed in SECTIONS.items():
        section = doc.get(name)
        if section is None:
            continue
        if not isinstance(section, dict):
            raise ConfigError(f"section {name!r} must be a mapping")
        bad = set(section) - allowed
        if bad:
            raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
    if doc.get("report") not in (None, "json", "csv"):
        raise ConfigError("report must be 'json' or 'csv'")
    cfg = RunConfig(**{k: v for k, v in doc.items() if v is not None})
    if not isinstance(cfg.threads, int) or cfg.threads < 1:
        raise ConfigError("threads must be a positive integer")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    return config_from_mapping(doc)


def with_overrides(cfg: RunConfig, **sections) -> RunConfig:
    """Return a copy with ``section={key: value}`` merged in (``None`` values skipped)."""
    updates = {}
    for name, values in sections.items():
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            continue
        current = getattr(cfg, name)
        updates[name] = {**current, **values} if isinstance(current, dict) else values
    return replace(cfg, **updates)
