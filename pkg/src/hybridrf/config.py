"""JSON experiment files: parsing, validation with line numbers, and presets.

An experiment file is a single JSON object whose keys map one-to-one onto
:class:`~hybridrf.harness.SimConfig` fields, plus a few output options.
``results.json`` written by ``run`` is itself a valid experiment file: the
``results`` key is ignored on load.
"""
import json
import re
from dataclasses import dataclass, field, fields, replace

from .channel import ArrayGeometry
from .exceptions import ConfigError, InvalidArgumentError
from .harness import SimConfig
from .rfpn import DEFAULT_OPERATOR_BUDGET, NetworkLosses

__all__ = [
    "Experiment",
    "QuantizationOptions",
    "parse_experiment",
    "load_experiment",
    "config_from_dict",
    "experiment_to_dict",
    "preset",
    "PRESETS",
]

_SIM_KEYS = {f.name for f in fields(SimConfig)} | {"losses_db"}
_OUTPUT_KEYS = {"plot", "workers", "quantization"}
_IGNORED_KEYS = {"results"}
_GEOMETRY_KEYS = {"kind", "elements_x", "elements_y", "spacing"}
_LOSS_KEYS = {"l_s", "l_ps", "l_c"}
_LOSS_DB_KEYS = {"divider", "phase_shifter", "combiner"}
_QUANT_KEYS = {"pairs", "variant", "phase_bits", "seed"}

DEFAULT_PAIRS = ((64, 2), (32, 4), (16, 8))


@dataclass(frozen=True)
class QuantizationOptions:
    """Settings for ``quantization-report``.

    Targets are constant-modulus ``1/sqrt(Nt)`` matrices with phases drawn
    from ``seed``; ``phase_bits=None`` fits phases at unlimited resolution.
    """

    pairs: tuple = DEFAULT_PAIRS
    variant: str = "fully-connected"
    phase_bits: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class Experiment:
    sim: SimConfig
    plot: bool = True
    workers: int = 1
    quantization: QuantizationOptions = field(default_factory=QuantizationOptions)


def _key_line(text, key):
    if text is None:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(text, key, message):
    raise ConfigError(message, lineno=_key_line(text, key) or 1)


def _check_keys(text, obj, allowed, where):
    if not isinstance(obj, dict):
        _fail(text, where, f"{where} must be a JSON object")
    for key in obj:
        if key not in allowed:
            _fail(text, key, f"unknown key {key!r} in {where}")


def _geometry(text, key, value):
    if value is None:
        return None
    _check_keys(text, value, _GEOMETRY_KEYS, key)
    try:
        return ArrayGeometry(**value)
    except (InvalidArgumentError, TypeError) as exc:
        _fail(text, key, f"{key}: {exc}")


def _pairs(text, value):
    try:
        pairs = tuple((int(a), int(b)) for a, b in value)
    except (TypeError, ValueError):
        _fail(text, "pairs", "quantization.pairs must be a list of [nt, ntrx] pairs")
    if not pairs or any(a < 1 or b < 1 for a, b in pairs):
        _fail(text, "pairs", "quantization.pairs must be non-empty with positive entries")
    if any(b > a for a, b in pairs):
        _fail(text, "pairs", "quantization.pairs needs ntrx <= nt in every pair")
    if any((a * b) ** 2 > DEFAULT_OPERATOR_BUDGET for a, b in pairs):
        _fail(text, "pairs", f"quantization.pairs: (nt*ntrx)^2 must not exceed {DEFAULT_OPERATOR_BUDGET}")
    for (a, b), raw in zip(pairs, value):
        if [a, b] != list(raw) or any(isinstance(x, bool) for x in raw):
            _fail(text, "pairs", "quantization.pairs entries must be integers")
    return pairs


def _quantization(text, value):
    if value is None:
        return QuantizationOptions()
    _check_keys(text, value, _QUANT_KEYS, "quantization")
    opts = dict(value)
    if "pairs" in opts:
        opts["pairs"] = _pairs(text, opts["pairs"])
    if opts.get("variant", "fully-connected") != "fully-connected":
        _fail(text, "variant", "quantization-report requires variant 'fully-connected'")
    bits = opts.get("phase_bits")
    if bits is not None and (isinstance(bits, bool) or not isinstance(bits, int) or bits < 1):
        _fail(text, "phase_bits", "quantization.phase_bits must be a positive integer or null")
    seed = opts.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        _fail(text, "seed", "quantization.seed must be an unsigned 64-bit integer")
    return QuantizationOptions(**opts)


def _blame(text, message, keys):
    # Attribute a SimConfig validation error to the first field it names.
    for key in sorted(keys, key=len, reverse=True):
        if re.search(r"\b" + re.escape(key) + r"\b", message):
            return key
    return None


def config_from_dict(data, text=None):
    """Build an :class:`Experiment` from a decoded JSON object.

    ``text`` is the source document, used only to attach line numbers to
    errors. Raises :class:`ConfigError`.
    """
    _check_keys(text, data, _SIM_KEYS | _OUTPUT_KEYS | _IGNORED_KEYS, "config")
    kwargs = {k: v for k, v in data.items() if k in _SIM_KEYS}

    for key in ("tx_geometry", "rx_geometry"):
        if key in kwargs:
            kwargs[key] = _geometry(text, key, kwargs[key])
    if "losses" in kwargs and "losses_db" in kwargs:
        _fail(text, "losses_db", "give either losses or losses_db, not both")
    if "losses_db" in kwargs:
        losses = kwargs.pop("losses_db")
        _check_keys(text, losses, _LOSS_DB_KEYS, "losses_db")
        try:
            kwargs["losses"] = NetworkLosses.from_db(**losses)
        except (InvalidArgumentError, TypeError, ValueError) as exc:
            _fail(text, "losses_db", f"losses_db: {exc}")
    elif "losses" in kwargs:
        losses = kwargs["losses"]
        _check_keys(text, losses, _LOSS_KEYS, "losses")
        try:
            kwargs["losses"] = NetworkLosses(**losses)
        except (InvalidArgumentError, TypeError, ValueError) as exc:
            _fail(text, "losses", f"losses: {exc}")
    for key in ("snr_grid_db", "methods"):
        if key in kwargs and not isinstance(kwargs[key], list):
            _fail(text, key, f"{key} must be a JSON array")
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in kwargs.get("snr_grid_db", [])):
        _fail(text, "snr_grid_db", "snr_grid_db entries must be numbers")
    if any(not isinstance(x, str) for x in kwargs.get("methods", [])):
        _fail(text, "methods", "methods entries must be strings")
    for key in ("allow_excess_streams", "report_analytic"):
        if key in kwargs and not isinstance(kwargs[key], bool):
            _fail(text, key, f"{key} must be true or false")
    if "angular_spread_deg" in kwargs and (
        isinstance(kwargs["angular_spread_deg"], bool)
        or not isinstance(kwargs["angular_spread_deg"], (int, float))
    ):
        _fail(text, "angular_spread_deg", "angular_spread_deg must be a number")
    if "master_seed" in kwargs and (
        isinstance(kwargs["master_seed"], bool) or not isinstance(kwargs["master_seed"], int)
    ):
        _fail(text, "master_seed", "master_seed must be an unsigned 64-bit integer")
    try:
        sim = SimConfig(**kwargs)
    except (InvalidArgumentError, TypeError, ValueError) as exc:
        key = _blame(text, str(exc), data.keys())
        raise ConfigError(str(exc), lineno=(_key_line(text, key) if key else None) or 1) from None

    plot = data.get("plot", True)
    if not isinstance(plot, bool):
        _fail(text, "plot", "plot must be true or false")
    workers = data.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        _fail(text, "workers", "workers must be a positive integer")
    return Experiment(sim=sim, plot=plot, workers=workers,
                      quantization=_quantization(text, data.get("quantization")))


def parse_experiment(text):
    """Parse JSON text into an :class:`Experiment`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", lineno=exc.lineno) from None
    return config_from_dict(data, text)


def load_experiment(path):
    """Read and parse an experiment file; unreadable files are config errors."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", lineno=1) from None
    return parse_experiment(text)


def experiment_to_dict(experiment):
    out = experiment.sim.to_dict()
    q = experiment.quantization
    out["plot"] = experiment.plot
    out["workers"] = experiment.workers
    out["quantization"] = {
        "pairs": [list(p) for p in q.pairs],
        "variant": q.variant,
        "phase_bits": q.phase_bits,
        "seed": q.seed,
    }
    return out


PRESETS = {
    "fig2": dict(nt=256, nr=16, ntrx=8),
    "fig3": dict(nt=256, nr=16, ntrx=2),
    "fig4": dict(nt=64, nr=16, ntrx=8),
}


def preset(name, scale=1.0, trials=None, seed=None, caption_ntrx=False):
    """Built-in figure configuration.

    ``scale`` shrinks ``Nt`` proportionally, rounded to a multiple of
    ``Ntrx`` (at least ``Ntrx``). ``caption_ntrx`` switches ``fig4`` to the
    two-chain setting.
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", lineno=1)
    if not 0 < scale <= 1:
        raise ConfigError("scale must lie in (0, 1]", lineno=1)
    params = dict(PRESETS[name])
    if caption_ntrx:
        if name != "fig4":
            raise ConfigError("--caption-ntrx only applies to fig4", lineno=1)
        params["ntrx"] = 2
    ntrx = params["ntrx"]
    params["nt"] = max(ntrx, int(round(params["nt"] * scale / ntrx)) * ntrx)
    if trials is not None:
        params["trials"] = trials
    if seed is not None:
        params["master_seed"] = seed
    try:
        return Experiment(sim=SimConfig(**params))
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc), lineno=1) from None


def with_sim(experiment, **changes):
    return replace(experiment, sim=replace(experiment.sim, **changes))
