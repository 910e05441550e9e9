"""
File formats.

* Design CSV -- header ``x1..xp,y1..yq``, one row per run, 17 significant
  digits, so that a design read back is identical to the one written.
* Run configuration JSON -- see :class:`RunConfig`.
* Engine state and trace JSON, written atomically.
"""
from dataclasses import dataclass, fields
import json
import os
import re
import tempfile
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from osfd.engine import Design, EngineConfig, EngineState, TraceEntry
from osfd.evaluators import Evaluator, SubprocessEvaluator
from osfd.exceptions import UsageError
from osfd.testbed import Problem, get_problem
from osfd.typing import ArrayLike, FloatArray

__all__ = [
    "RunConfig",
    "atomic_write_text",
    "design_frame",
    "load_state",
    "read_design",
    "read_points",
    "save_state",
    "write_design",
    "write_frame",
    "write_points",
    "write_trace",
]

FLOAT_FORMAT = "%.17g"
SUBPROCESS_PREFIX = "subprocess:"
_DESIGN_COLUMN = re.compile(r"^([xy])(\d+)$")

PathLike = Union[str, "os.PathLike[str]"]


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename"""
    directory = os.path.dirname(os.path.abspath(path))
    handle, tmp = tempfile.mkstemp(dir=directory, prefix=".osfd-", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as out:
            out.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_frame(frame: pd.DataFrame, path: PathLike) -> None:
    """Write a DataFrame as CSV with 17 significant digits"""
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    atomic_write_text(path, text)


def design_frame(design: Design) -> pd.DataFrame:
    """Design as a DataFrame with columns ``x1..xp,y1..yq``"""
    columns = [f"x{i + 1}" for i in range(design.p)] + [f"y{j + 1}" for j in range(design.q)]
    return pd.DataFrame(np.hstack([design.inputs, design.outputs]), columns=columns)


def write_design(design: Design, path: PathLike) -> None:
    """
    Write a design CSV

    Parameters
    ----------
    design : Design
        Design to write
    path : str
        Destination file
    """
    write_frame(design_frame(design), path)


def _read_frame(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise UsageError(f"cannot read {path}: {err}") from err


def _split_columns(columns: Sequence[str]) -> Optional[Tuple[int, int]]:
    matches = [_DESIGN_COLUMN.match(str(c).strip()) for c in columns]
    if not all(matches):
        return None
    names = [(m.group(1), int(m.group(2))) for m in matches]  # type: ignore[union-attr]
    p = sum(1 for kind, _ in names if kind == "x")
    q = len(names) - p
    expected = [("x", i + 1) for i in range(p)] + [("y", j + 1) for j in range(q)]
    if names != expected or p == 0 or q == 0:
        return None
    return p, q


def read_design(path: PathLike) -> Design:
    """
    Read a design CSV

    Parameters
    ----------
    path : str
        File written by :func:`write_design`

    Returns
    -------
    Design
        The design
    """
    frame = _read_frame(path)
    dims = _split_columns(list(frame.columns))
    if dims is None:
        raise UsageError(f"{path}: header must be x1..xp,y1..yq, got {list(frame.columns)}")
    p, q = dims
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as err:
        raise UsageError(f"{path}: non-numeric values: {err}") from err
    if not np.all(np.isfinite(values)):
        raise UsageError(f"{path}: design contains missing or non-finite values")
    return Design(p, q, values[:, :p], values[:, p:])


def read_points(path: PathLike) -> FloatArray:
    """
    Read a point set CSV with a header row

    A design CSV is accepted as well, in which case its outputs are returned.
    """
    frame = _read_frame(path)
    dims = _split_columns(list(frame.columns))
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as err:
        raise UsageError(f"{path}: non-numeric values: {err}") from err
    if dims is not None:
        values = values[:, dims[0] :]
    if values.shape[0] == 0 or not np.all(np.isfinite(values)):
        raise UsageError(f"{path}: point set is empty or has non-finite values")
    return values


def write_points(points: ArrayLike, path: PathLike, prefix: str = "y") -> None:
    """Write a point set CSV with header ``{prefix}1..{prefix}d``"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    columns = [f"{prefix}{j + 1}" for j in range(points.shape[1])]
    write_frame(pd.DataFrame(points, columns=columns), path)


def write_trace(trace: List[TraceEntry], path: PathLike, **extra: Any) -> None:
    """Write the sequential trace as JSON, with optional extra fields"""
    document = dict(extra)
    document["trace"] = [entry._asdict() for entry in trace]
    atomic_write_text(path, json.dumps(document, indent=1))


def save_state(state: EngineState, path: PathLike) -> None:
    atomic_write_text(path, state.to_json())


def load_state(path: PathLike) -> EngineState:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        raise UsageError(f"cannot read state file {path}: {err}") from err
    return EngineState.from_json(text)


@dataclass(frozen=True)
class RunConfig:
    """
    Run configuration file

    Attributes
    ----------
    problem : str
        Builtin problem with parameters, e.g. ``"exponential:alpha=100"``,
        or ``"subprocess:<command>"``
    engine : EngineConfig
        Settings of the sequential design
    p, q : int, optional
        Dimensions, required for subprocess problems
    record_every : int
        Spacing of the design sizes recorded by the benchmark
    reference_size : int, optional
        Size of the reference set; the problem's default if omitted
    timeout : float, optional
        Seconds a subprocess evaluator may take per run
    """

    problem: str
    engine: EngineConfig
    p: Optional[int] = None
    q: Optional[int] = None
    record_every: int = 10
    reference_size: Optional[int] = None
    timeout: Optional[float] = None

    def __post_init__(self) -> None:
        if not isinstance(self.problem, str):
            raise UsageError(f"problem must be a string, got {self.problem!r}")
        for name in ("p", "q", "record_every", "reference_size"):
            value = getattr(self, name)
            if value is None and name != "record_every":
                continue
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise UsageError(f"{name} must be a positive integer, got {value!r}")
        if self.timeout is not None and (
            isinstance(self.timeout, bool)
            or not isinstance(self.timeout, (int, float))
            or not 0 < self.timeout < np.inf
        ):
            raise UsageError(f"timeout must be a positive number, got {self.timeout!r}")
        if self.is_subprocess:
            if self.p is None or self.q is None:
                raise UsageError("subprocess problems need p and q")
            if not self.problem[len(SUBPROCESS_PREFIX) :].strip():
                raise UsageError("subprocess problem has an empty command")
            p, q = self.p, self.q
        else:
            problem = self.builtin_problem()
            for name, value in (("p", problem.p), ("q", problem.q)):
                given = getattr(self, name)
                if given is not None and given != value:
                    raise UsageError(f"{self.problem} has {name}={value}, config says {given}")
            p, q = problem.p, problem.q
        self.engine.validate(p, q)

    @property
    def is_subprocess(self) -> bool:
        return self.problem.startswith(SUBPROCESS_PREFIX)

    @property
    def dims(self) -> Tuple[int, int]:
        if self.is_subprocess:
            assert self.p is not None and self.q is not None
            return self.p, self.q
        problem = self.builtin_problem()
        return problem.p, problem.q

    def builtin_problem(self) -> Problem:
        if self.is_subprocess:
            raise UsageError("a builtin problem is required, got a subprocess evaluator")
        return get_problem(self.problem)

    def evaluator(self) -> Evaluator:
        """Evaluator of the configured problem"""
        if self.is_subprocess:
            p, q = self.dims
            return SubprocessEvaluator(
                self.problem[len(SUBPROCESS_PREFIX) :], p, q, timeout=self.timeout
            )
        return self.builtin_problem().evaluator()

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RunConfig":
        values = dict(values)
        own = {f.name for f in fields(cls)} - {"engine"}
        engine_keys = {f.name for f in fields(EngineConfig)}
        unknown = set(values) - own - engine_keys
        if unknown:
            raise UsageError(f"unknown configuration keys: {sorted(unknown)}")
        if "problem" not in values:
            raise UsageError("configuration needs a problem")
        engine_values = {k: values.pop(k) for k in list(values) if k in engine_keys}
        for key in ("n", "n0"):
            if key not in engine_values:
                raise UsageError(f"configuration needs {key}")
        try:
            engine = EngineConfig(**engine_values)
        except TypeError as err:
            raise UsageError(f"invalid engine settings: {err}") from err
        return cls(engine=engine, **values)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"problem": self.problem}
        out.update(self.engine.to_dict())
        for name in ("p", "q", "reference_size", "timeout"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        out["record_every"] = self.record_every
        return out

    @classmethod
    def load(cls, path: PathLike) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as handle:
                values = json.load(handle)
        except OSError as err:
            raise UsageError(f"cannot read configuration {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise UsageError(f"configuration {path} is not valid JSON: {err}") from err
        if not isinstance(values, dict):
            raise UsageError(f"configuration {path} must hold a JSON object")
        return cls.from_dict(values)
