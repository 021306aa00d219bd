"""Named experiment scenarios, their config files and output bundles.

All five scenarios share one pipeline. They differ only in the default
optical channel (and frame count), expressed relative to the reference
signal ``max_signal = fill_ratio * sum(object)``, the mean clean bucket value:

==============  =====  ======  ==========  ===============  ===========  ======
scenario        gain   jitter  background  detector noise   object mode  frames
==============  =====  ======  ==========  ===============  ===========  ======
direct          1      0       0           0                transmission 18000
scatter         0.8    0       0.2 m       0                transmission 18000
corner          0.05   0       0.5 m       0.01 m           transmission 18000
corner_scatter  0.05   0.2     0.5 m       0.01 m           transmission 18000
corner_diffuse  0.02   0       1.0 m       0                reflectance  50000
==============  =====  ======  ==========  ===============  ===========  ======

These magnitudes are engineering defaults, not measured values.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DimensionError
from .forward import (
    ChannelSpec,
    ObjectMap,
    ObjectMode,
    load_object_image,
    make_glyph_object,
    make_toy_target,
    save_object_image,
    write_trace,
)
from .metrics import compute_snr, convergence_curve, fidelity, mask_from_object, write_curves_csv
from .patterns import FillMode, PatternGridSpec
from .pipeline import Scenario, acquire
from .reconstruct import write_display_pgm, write_image_csv

__all__ = [
    "SCENARIOS",
    "ScenarioConfig",
    "RelativeValue",
    "parse_config",
    "serialize_config",
    "load_config",
    "build_scenario",
    "default_channel",
    "reference_signal",
    "run_scenario",
    "run_convergence",
    "resolution_sweep",
]

SCENARIOS = ("direct", "scatter", "corner", "corner_scatter", "corner_diffuse")

# (gain_mean, gain_jitter, background/m, detector_noise/m)
_CHANNEL_TABLE = {
    "direct": (1.0, 0.0, 0.0, 0.0),
    "scatter": (0.8, 0.0, 0.2, 0.0),
    "corner": (0.05, 0.0, 0.5, 0.01),
    "corner_scatter": (0.05, 0.2, 0.5, 0.01),
    "corner_diffuse": (0.02, 0.0, 1.0, 0.0),
}
_DEFAULT_FRAMES = {"corner_diffuse": 50000}
_DEFAULT_MODE = {"corner_diffuse": ObjectMode.REFLECTANCE}
_CHANNEL_KEYS = ("gain_mean", "gain_jitter", "background_mean", "background_jitter", "detector_noise_sigma")
BUILTIN_OBJECTS = ("toy",)


@dataclass(frozen=True)
class RelativeValue:
    """A channel override written as ``<factor>*max_signal``."""

    factor: float

    def resolve(self, reference: float) -> float:
        return self.factor * reference

    def __str__(self):
        return f"{self.factor!r}*max_signal"


def _parse_channel_value(text: str, path: str):
    text = text.strip().replace(" ", "")
    try:
        if text.endswith("*max_signal"):
            return RelativeValue(float(text[: -len("*max_signal")]))
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number or '<number>*max_signal', got {text!r}", path) from None


def _resolve(overrides: dict, reference: float) -> dict:
    return {k: (v.resolve(reference) if isinstance(v, RelativeValue) else float(v)) for k, v in overrides.items()}


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment: scenario id, patterns, object source, channel overrides.

    Exactly one of ``glyph``, ``image`` and ``builtin`` selects the object.
    ``out`` is where bundles go; it is not part of the bundle's identity.
    """

    scenario_id: str = "direct"
    width: int = 40
    height: int = 40
    fill_ratio: float = 0.11
    fill_mode: str = FillMode.EXACT_COUNT.value
    seed: int = 0
    noise_seed: int = 1
    frames: int | None = None
    glyph: str | None = "XJTU"
    glyph_scale: int | None = None
    image: str | None = None
    builtin: str | None = None
    object_mode: str | None = None
    channel: dict = field(default_factory=dict)
    threshold: float = 0.5
    snr_image: str = "fluct"
    n_grid: tuple = (500, 2000, 8000, 18000)
    seeds: tuple = tuple(range(10))
    variants: dict = field(default_factory=dict)
    out: str | None = None
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scenario_id not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario_id!r}; choose from {', '.join(SCENARIOS)}", "scenario.id")
        if self.frames is not None and self.frames < 1:
            raise ConfigError(f"frame count must be >= 1, got {self.frames}", "scenario.frames")
        sources = [s for s in (self.glyph, self.image, self.builtin) if s]
        if len(sources) != 1:
            raise ConfigError("exactly one of glyph, image, builtin must be set", "object")
        if self.glyph_scale is not None and (not self.glyph or self.glyph_scale < 1):
            raise ConfigError("scale needs a glyph object and must be >= 1", "object.scale")
        if self.builtin and self.builtin not in BUILTIN_OBJECTS:
            raise ConfigError(f"unknown builtin object {self.builtin!r}", "object.builtin")
        if self.object_mode is not None and self.object_mode not in {m.value for m in ObjectMode}:
            raise ConfigError(f"unknown object mode {self.object_mode!r}", "object.mode")
        if self.snr_image not in ("fluct", "g2"):
            raise ConfigError(f"snr image must be 'fluct' or 'g2', got {self.snr_image!r}", "metrics.image")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}", "metrics.threshold")
        for section, overrides in [("channel", self.channel)] + [(f"variant:{k}", v) for k, v in self.variants.items()]:
            for key in overrides:
                if key not in _CHANNEL_KEYS:
                    raise ConfigError(f"unknown channel parameter {key!r}", f"{section}.{key}")
        grid = list(self.n_grid)
        if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing positive counts, got {grid}", "convergence.n_grid")
        try:
            self.pattern_spec()
            ChannelSpec(noise_seed=self.noise_seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "patterns") from exc

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def n_frames(self) -> int:
        return self.frames if self.frames is not None else _DEFAULT_FRAMES.get(self.scenario_id, 18000)

    def pattern_spec(self) -> PatternGridSpec:
        return PatternGridSpec(self.width, self.height, self.fill_ratio, self.seed, self.fill_mode)


# -- config files -----------------------------------------------------------


def _ints(text: str, path: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"expected a list of integers, got {text!r}", path) from None


def parse_config(text: str, base_dir: str = ".") -> ScenarioConfig:
    """Parse INI-style config text (sections: scenario, patterns, object, channel,
    metrics, convergence, and any number of ``variant:<name>``)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from exc
    known = {
        "scenario": {"id", "frames", "noise_seed", "out"},
        "patterns": {"width", "height", "fill_ratio", "fill_mode", "seed"},
        "object": {"glyph", "scale", "image", "builtin", "mode"},
        "metrics": {"threshold", "image"},
        "convergence": {"n_grid", "seeds"},
    }
    kw: dict = {"base_dir": base_dir}
    channel: dict = {}
    variants: dict = {}
    object_keys = set()

    def get(section, key, cast):
        raw = parser[section][key]
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"invalid value {raw!r}", f"{section}.{key}") from None

    for section in parser.sections():
        if section.startswith("variant:"):
            name = section.split(":", 1)[1].strip()
            if not name:
                raise ConfigError("variant sections need a name", section)
            variants[name] = {k: _parse_channel_value(v, f"{section}.{k}") for k, v in parser[section].items()}
            continue
        if section == "channel":
            channel = {k: _parse_channel_value(v, f"channel.{k}") for k, v in parser[section].items()}
            continue
        if section not in known:
            raise ConfigError("unknown section", section)
        for key in parser[section]:
            if key not in known[section]:
                raise ConfigError("unknown key", f"{section}.{key}")
        if section == "object":
            object_keys = set(parser[section])
    sec = parser["scenario"] if parser.has_section("scenario") else {}
    if "id" in sec:
        kw["scenario_id"] = sec["id"].strip()
    if "frames" in sec:
        kw["frames"] = get("scenario", "frames", int)
    if "noise_seed" in sec:
        kw["noise_seed"] = get("scenario", "noise_seed", int)
    if "out" in sec:
        kw["out"] = sec["out"].strip()
    if parser.has_section("patterns"):
        for key, cast in (("width", int), ("height", int), ("fill_ratio", float), ("seed", int), ("fill_mode", str)):
            if key in parser["patterns"]:
                kw[key] = get("patterns", key, cast).strip() if cast is str else get("patterns", key, cast)
    if object_keys:
        kw["glyph"] = None
        for key in ("glyph", "image", "builtin"):
            if key in object_keys:
                kw[key] = parser["object"][key].strip() or None
        if "mode" in object_keys:
            kw["object_mode"] = parser["object"]["mode"].strip()
        if "scale" in object_keys:
            kw["glyph_scale"] = get("object", "scale", int)
    if parser.has_section("metrics"):
        if "threshold" in parser["metrics"]:
            kw["threshold"] = get("metrics", "threshold", float)
        if "image" in parser["metrics"]:
            kw["snr_image"] = parser["metrics"]["image"].strip()
    if parser.has_section("convergence"):
        if "n_grid" in parser["convergence"]:
            kw["n_grid"] = _ints(parser["convergence"]["n_grid"], "convergence.n_grid")
        if "seeds" in parser["convergence"]:
            kw["seeds"] = _ints(parser["convergence"]["seeds"], "convergence.seeds")
    kw["channel"] = channel
    kw["variants"] = variants
    if kw.get("fill_mode") not in (None, *(m.value for m in FillMode)):
        raise ConfigError(f"unknown fill mode {kw['fill_mode']!r}", "patterns.fill_mode")
    return ScenarioConfig(**kw)


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def serialize_config(config: ScenarioConfig, include_out: bool = True) -> str:
    lines = ["[scenario]", f"id = {config.scenario_id}"]
    if config.frames is not None:
        lines.append(f"frames = {config.frames}")
    lines.append(f"noise_seed = {config.noise_seed}")
    if include_out and config.out:
        lines.append(f"out = {config.out}")
    lines += [
        "",
        "[patterns]",
        f"width = {config.width}",
        f"height = {config.height}",
        f"fill_ratio = {config.fill_ratio!r}",
        f"fill_mode = {config.fill_mode}",
        f"seed = {config.seed}",
        "",
        "[object]",
    ]
    for key in ("glyph", "image", "builtin"):
        value = getattr(config, key)
        if value:
            lines.append(f"{key} = {value}")
    if config.glyph_scale is not None:
        lines.append(f"scale = {config.glyph_scale}")
    if config.object_mode:
        lines.append(f"mode = {config.object_mode}")
    lines += ["", "[channel]"]
    lines += [f"{k} = {_fmt(v)}" for k, v in config.channel.items()]
    lines += [
        "",
        "[metrics]",
        f"threshold = {config.threshold!r}",
        f"image = {config.snr_image}",
        "",
        "[convergence]",
        "n_grid = " + ", ".join(str(n) for n in config.n_grid),
        "seeds = " + ", ".join(str(s) for s in config.seeds),
    ]
    for name, overrides in config.variants.items():
        lines += ["", f"[variant:{name}]"]
        lines += [f"{k} = {_fmt(v)}" for k, v in overrides.items()]
    return "\n".join(lines) + "\n"


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=str(path.parent))


# -- building scenarios -----------------------------------------------------


def build_object(config: ScenarioConfig) -> ObjectMap:
    mode = config.object_mode or _DEFAULT_MODE.get(config.scenario_id, ObjectMode.TRANSMISSION)
    if config.glyph:
        try:
            obj = make_glyph_object(config.glyph, config.width, config.height, config.glyph_scale, mode=mode)
        except ValueError as exc:
            raise ConfigError(str(exc), "object.glyph") from exc
        return obj
    if config.builtin:
        return make_toy_target(config.width, config.height).with_mode(mode)
    path = Path(config.image)
    if not path.is_absolute():
        path = Path(config.base_dir) / path
    return load_object_image(path, config.width, config.height, mode=mode)


def _glyph_fit(config: ScenarioConfig) -> int:
    text = config.glyph
    return min(config.width // (6 * len(text) - 1), config.height // 7)


def reference_signal(obj: ObjectMap, spec: PatternGridSpec) -> float:
    """Mean clean bucket value, ``fill_ratio * sum(object)``."""
    return spec.fill_ratio * float(obj.values.sum())


def default_channel(scenario_id: str, reference: float, noise_seed: int = 0) -> ChannelSpec:
    gain, jitter, bg, noise = _CHANNEL_TABLE[scenario_id]
    return ChannelSpec(
        gain_mean=gain,
        gain_jitter=jitter,
        background_mean=bg * reference,
        detector_noise_sigma=noise * reference,
        noise_seed=noise_seed,
    )


def build_scenario(config: ScenarioConfig, variant: str | None = None) -> Scenario:
    spec = config.pattern_spec()
    obj = build_object(config)
    reference = reference_signal(obj, spec)
    overrides = dict(config.channel)
    if variant is not None:
        overrides.update(config.variants[variant])
    try:
        channel = default_channel(config.scenario_id, reference, config.noise_seed).replace(
            **_resolve(overrides, reference)
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "channel") from exc
    return Scenario(spec, obj, channel, config.scenario_id)


# -- bundles ----------------------------------------------------------------


@dataclass
class RunResult:
    out_dir: Path
    snr: object
    fidelity: float
    manifest: dict


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _write_manifest(out: Path, manifest: dict, files) -> dict:
    manifest = dict(manifest)
    manifest["files"] = {name: _sha256(out / name) for name in sorted(files)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _out_dir(config: ScenarioConfig, out) -> Path:
    out = out or config.out
    if not out:
        raise ConfigError("no output directory given", "scenario.out")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_scenario(config: ScenarioConfig, out=None, threads: int = 1) -> RunResult:
    """Simulate, reconstruct and score one scenario, writing a bundle to ``out``.

    Bundle contents: ``config.ini``, ``object.pgm``, ``trace.csv`` (+ sidecar),
    ``g2.csv``, ``fluct.csv``, ``g2.pgm``, ``fluct.pgm``, ``snr.txt``,
    ``snr.csv`` and ``manifest.json`` with SHA-256 digests of the others.
    Reruns with the same config produce identical bytes.
    """
    out = _out_dir(config, out)
    scenario = build_scenario(config)
    frames = config.n_frames
    acq = acquire(scenario, frames, threads=threads)
    image = acq.image()
    config_text = serialize_config(config, include_out=False)
    (out / "config.ini").write_text(config_text)
    save_object_image(out / "object.pgm", scenario.object)
    write_trace(out / "trace.csv", acq.trace)
    write_image_csv(out / "g2.csv", image.g2)
    write_image_csv(out / "fluct.csv", image.fluct)
    g2_display = write_display_pgm(out / "g2.pgm", image.g2)
    write_display_pgm(out / "fluct.pgm", image.fluct)
    scored = image.g2 if config.snr_image == "g2" else image.fluct
    mask = mask_from_object(scenario.object, config.threshold)
    report = compute_snr(scored, mask, frames)
    (out / "snr.txt").write_text(report.to_text())
    (out / "snr.csv").write_text(report.to_csv())
    fid = fidelity(image.fluct, scenario.object)
    files = ["config.ini", "object.pgm", "trace.csv", "trace.csv.meta.json", "g2.csv",
             "fluct.csv", "g2.pgm", "fluct.pgm", "snr.txt", "snr.csv"]
    manifest = _write_manifest(out, {
        "tool": "ghostcam",
        "version": __version__,
        "scenario_id": config.scenario_id,
        "config_sha256": _config_hash(config_text),
        "pattern_seed": scenario.patterns.seed,
        "noise_seed": scenario.channel.noise_seed,
        "frames": frames,
        "channel": scenario.channel.to_dict(),
        "object_mode": scenario.object.mode.value,
        "trace_fingerprint": acq.trace.spec_fingerprint,
        "g2_undefined_pixels": g2_display.n_undefined,
        "snr_image": config.snr_image,
        "snr_db": report.snr_db,
        "fidelity": fid,
    }, files)
    return RunResult(out, report, fid, manifest)


def run_convergence(config: ScenarioConfig, out=None, n_grid=None, seeds=None, threads: int = 1) -> dict:
    """SNR-vs-frames curves, one per channel variant (or the plain scenario).

    Writes ``convergence.csv`` (column pair per variant), one
    ``convergence_<name>.csv`` per curve and ``convergence_per_seed.csv``.
    """
    n_grid = tuple(config.n_grid if n_grid is None else n_grid)
    seeds = tuple(config.seeds if seeds is None else seeds)
    if not seeds:
        raise ConfigError("seed list is empty", "convergence.seeds")
    config = config.replace(n_grid=n_grid, seeds=seeds)
    out = _out_dir(config, out)
    names = list(config.variants) or [config.scenario_id]
    curves = {}
    for name in names:
        scenario = build_scenario(config, name if config.variants else None)
        mask = mask_from_object(scenario.object, config.threshold)
        curves[name] = convergence_curve(
            scenario, n_grid, seeds, mask=mask, use_g2=config.snr_image == "g2", threads=threads
        )
    config_text = serialize_config(config, include_out=False)
    (out / "config.ini").write_text(config_text)
    write_curves_csv(out / "convergence.csv", curves)
    files = ["config.ini", "convergence.csv", "convergence_per_seed.csv"]
    for name, curve in curves.items():
        (out / f"convergence_{name}.csv").write_text(curve.to_csv())
        files.append(f"convergence_{name}.csv")
    buf = io.StringIO()
    buf.write("variant,seed," + ",".join(f"n{n}" for n in n_grid) + "\n")
    for name, curve in curves.items():
        for s, row in zip(curve.seeds, curve.per_seed):
            buf.write(f"{name},{s}," + ",".join(repr(float(v)) for v in row) + "\n")
    (out / "convergence_per_seed.csv").write_text(buf.getvalue())
    _write_manifest(out, {
        "tool": "ghostcam",
        "version": __version__,
        "scenario_id": config.scenario_id,
        "config_sha256": _config_hash(config_text),
        "seeds": list(seeds),
        "n_grid": list(n_grid),
        "variants": names,
    }, files)
    return curves


def resolution_sweep(config: ScenarioConfig, scales, out=None, threads: int = 1) -> list[RunResult]:
    """Run the scenario at integer multiples of the grid size.

    Patterns and object are rescaled together: glyphs are re-rendered with
    their magnification multiplied by the scale, the builtin target is
    re-rendered, image objects must already match the scaled grid.
    """
    scales = [int(s) for s in scales]
    if not scales or any(s < 1 for s in scales):
        raise ConfigError(f"scale factors must be positive integers, got {scales}", "sweep.scales")
    out = _out_dir(config, out)
    glyph_scale = (config.glyph_scale or _glyph_fit(config)) if config.glyph else None
    results = []
    for s in scales:
        scaled = config.replace(width=config.width * s, height=config.height * s)
        if glyph_scale is not None and s > 1:
            # same text footprint, sampled s times finer
            scaled = scaled.replace(glyph_scale=glyph_scale * s)
        try:
            results.append(run_scenario(scaled, out / f"scale_{s}", threads=threads))
        except DimensionError as exc:
            raise ConfigError(f"object cannot match the x{s} grid: {exc}", "object.image") from exc
    base = results[0].snr.snr_db
    lines = ["scale,width,height,frames,snr_db,delta_snr_db,fidelity"]
    for s, r in zip(scales, results):
        db = r.snr.snr_db
        delta = "" if db is None or base is None else repr(db - base)
        lines.append(f"{s},{config.width * s},{config.height * s},{r.manifest['frames']},"
                     f"{'' if db is None else repr(db)},{delta},{r.fidelity!r}")
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return results
