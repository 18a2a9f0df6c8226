"""Run descriptors, array serialization and table output."""

import csv
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError

COMMANDS = ("convert", "ground-state", "eop", "cop", "exact-eop", "flow")
MODELS = ("kg", "ising", "file")
REPRESENTATIONS = ("covariance", "J", "squeezing", "bogoliubov", "thermal", "wavefunction", "generator")


def encode_array(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return a.tolist()


def decode_array(obj, name="array") -> np.ndarray:
    try:
        if isinstance(obj, dict):
            return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        return np.asarray(obj, dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{name}: cannot decode matrix ({exc})") from exc


def parse_split(s):
    """'1+2|1+2' or [1, 2, 1, 2] -> (n_A, n_B, n_A', n_B')."""
    if isinstance(s, str):
        try:
            sys_part, anc_part = s.split("|")
            vals = [int(x) for x in sys_part.split("+")] + [int(x) for x in anc_part.split("+")]
        except ValueError as exc:
            raise ParseError(f"bad split {s!r}; expected 'nA+nB|nA'+nB''") from exc
    else:
        vals = list(s)
    if len(vals) != 4 or any((not isinstance(v, (int, np.integer))) or v < 0 for v in vals):
        raise ParseError(f"bad split {s!r}")
    return tuple(int(v) for v in vals)


def split_label(split) -> str:
    a, b, ap, bp = split
    return f"{a}+{b}|{ap}+{bp}"


@dataclass
class ModelSpec:
    type: str = "kg"
    N: int = 100
    m: float = 0.1
    J: float = 1.0
    h: float = 1.0
    path: Optional[str] = None


@dataclass
class RunDescriptor:
    """Validated input of one CLI run.

    Defaults: KG chain with N = 100 and m = 0.1, one start, seed 0,
    gradient tolerance 1e-9.
    """

    command: str
    model: ModelSpec = field(default_factory=ModelSpec)
    splits: list = field(default_factory=lambda: [(1, 1, 1, 1)])
    distances: list = field(default_factory=lambda: [10])
    n_A: int = 1
    n_ancilla: list = field(default_factory=lambda: [1])
    sizes: list = field(default_factory=list)
    optimizer: dict = field(default_factory=dict)
    seed: int = 0
    starts: int = 1
    tol: Optional[float] = None
    steps: int = 100
    dt: float = 1e-3
    spread: float = 0.3
    parity_preserving: bool = True
    rep_from: Optional[str] = None
    rep_to: Optional[str] = None
    kind: Optional[str] = None
    data: dict = field(default_factory=dict)

    def seeds(self) -> list:
        return [self.seed + k for k in range(self.starts)]

    def to_json(self) -> dict:
        d = asdict(self)
        d["splits"] = [split_label(s) for s in self.splits]
        d.pop("data")
        return d


def _require(cond, msg):
    if not cond:
        raise ParseError(msg)


def parse_descriptor(raw: dict, command: str) -> RunDescriptor:
    if not isinstance(raw, dict):
        raise ParseError("descriptor must be a JSON object")
    _require(command in COMMANDS, f"unknown command {command!r}")
    known = set(RunDescriptor.__dataclass_fields__) | {"from", "to", "model"}
    unknown = set(raw) - known
    _require(not unknown, f"unknown descriptor keys: {sorted(unknown)}")
    model_raw = raw.get("model", {})
    if isinstance(model_raw, str):
        model_raw = {"type": model_raw}
    _require(isinstance(model_raw, dict), "model must be an object or a name")
    unknown = set(model_raw) - set(ModelSpec.__dataclass_fields__)
    _require(not unknown, f"unknown model keys: {sorted(unknown)}")
    model = ModelSpec(**model_raw)
    _require(model.type in MODELS, f"model type must be one of {MODELS}")
    _require(isinstance(model.N, int) and model.N >= 2, "model N must be an integer >= 2")
    if model.type == "kg":
        _require(model.m > 0, "mass must be positive")
    if model.type == "file":
        _require(model.path is not None, "file model needs a path")
    d = RunDescriptor(command=command, model=model)
    for key in ("n_A", "seed", "starts", "steps"):
        if key in raw:
            _require(isinstance(raw[key], int), f"{key} must be an integer")
            setattr(d, key, raw[key])
    for key in ("dt", "spread", "tol"):
        if key in raw:
            _require(isinstance(raw[key], (int, float)) and raw[key] > 0, f"{key} must be positive")
            setattr(d, key, float(raw[key]))
    if "splits" in raw:
        _require(isinstance(raw["splits"], list) and raw["splits"], "splits must be a nonempty list")
        d.splits = [parse_split(s) for s in raw["splits"]]
    if "distances" in raw:
        _require(isinstance(raw["distances"], list) and all(isinstance(x, int) and x >= 0 for x in raw["distances"]),
                 "distances must be a list of non-negative integers")
        d.distances = list(raw["distances"])
    for key in ("n_ancilla", "sizes"):
        if key in raw:
            _require(isinstance(raw[key], list) and all(isinstance(x, int) and x >= 0 for x in raw[key]),
                     f"{key} must be a list of non-negative integers")
            setattr(d, key, list(raw[key]))
    if "optimizer" in raw:
        _require(isinstance(raw["optimizer"], dict), "optimizer must be an object")
        d.optimizer = dict(raw["optimizer"])
    if "parity_preserving" in raw:
        d.parity_preserving = bool(raw["parity_preserving"])
    d.rep_from = raw.get("from", raw.get("rep_from"))
    d.rep_to = raw.get("to", raw.get("rep_to"))
    d.kind = raw.get("kind")
    d.data = raw.get("data", {})
    _require(d.starts >= 1, "starts must be at least 1")
    return d


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON ({exc})") from exc
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc})") from exc


def fmt(x) -> str:
    """Byte-stable 9 significant-figure formatting."""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def versions() -> dict:
    import scipy

    from . import __version__

    return {
        "gaussopt": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_metadata(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
