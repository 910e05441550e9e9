"""
Sequential output space-filling design.

:func:`run_osfd` drives a black-box evaluator through the full loop. The
same loop is exposed one step at a time by :class:`EngineState`, whose
:meth:`~EngineState.ask` proposes the next input and whose
:meth:`~EngineState.tell` records the observed output. Both paths consume
the random stream identically, so they build the same design.
"""
from dataclasses import asdict, dataclass, field
import json
import logging
import time
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from osfd.approx import approx_gen
from osfd.exceptions import EvaluatorError, OSFDError, ProtocolError, UsageError
from osfd.filldist import FillRecord, local_fill_distances
from osfd.geometry import ScaleRecord, as_points, scale_to_unit_box
from osfd.perturb import propose
from osfd.rng import SeededRng
from osfd.sampling import DEFAULT_MAXIMIN_ITERS, maximin_lhd, random_lhd
from osfd.typing import ArrayLike, FloatArray

__all__ = [
    "Design",
    "EngineConfig",
    "EngineState",
    "TraceEntry",
    "run_osfd",
]

logger = logging.getLogger(__name__)

METHODS = ("greedy", "ei")
INIT_METHODS = ("random_lhd", "maximin_lhd")
STATE_VERSION = 1


class TraceEntry(NamedTuple):
    """
    One sequential step

    Attributes
    ----------
    size : int
        Design size when the step was proposed
    i_star : int
        Run with the largest local fill distance
    fill : float
        Global fill estimate of the (scaled) outputs
    rule : str
        Perturbation rule that produced the new input
    seconds : float
        Wall time spent on the fill record and the proposal
    """

    size: int
    i_star: int
    fill: float
    rule: str
    seconds: float


@dataclass
class Design:
    """
    Inputs and raw outputs of the runs made so far

    Parameters
    ----------
    p : int
        Input dimension
    q : int
        Output dimension
    inputs : array_like, optional
        Inputs in the unit hypercube, shape (m, p)
    outputs : array_like, optional
        Raw outputs, shape (m, q)

    Attributes
    ----------
    scale : ScaleRecord or None
        Output scaling used by the latest fill record
    """

    p: int
    q: int
    inputs: FloatArray = field(default=None)  # type: ignore[assignment]
    outputs: FloatArray = field(default=None)  # type: ignore[assignment]
    scale: Optional[ScaleRecord] = None

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 1:
            raise UsageError(f"p and q must be positive, got p={self.p}, q={self.q}")
        if self.inputs is None:
            self.inputs = np.empty((0, self.p))
        if self.outputs is None:
            self.outputs = np.empty((0, self.q))
        self.inputs = np.asarray(self.inputs, dtype=float).reshape(-1, self.p)
        self.outputs = np.asarray(self.outputs, dtype=float).reshape(-1, self.q)
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise UsageError(
                f"{self.inputs.shape[0]} inputs but {self.outputs.shape[0]} outputs"
            )
        if np.any((self.inputs < 0) | (self.inputs > 1)):
            raise UsageError("design inputs must lie in the unit hypercube")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def append(self, x: ArrayLike, y: ArrayLike) -> None:
        """Add one run"""
        x = as_points(x, "x", dim=self.p)
        y = as_points(y, "y", dim=self.q)
        if x.shape[0] != 1 or y.shape[0] != 1:
            raise UsageError("append takes a single run")
        if np.any((x < 0) | (x > 1)):
            raise UsageError("x must lie in the unit hypercube")
        self.inputs = np.vstack([self.inputs, x])
        self.outputs = np.vstack([self.outputs, y])

    def prefix(self, k: int) -> "Design":
        """The first ``k`` runs"""
        if not 0 <= k <= len(self):
            raise UsageError(f"k must be between 0 and {len(self)}, got {k}")
        return Design(self.p, self.q, self.inputs[:k].copy(), self.outputs[:k].copy())


@dataclass(frozen=True)
class EngineConfig:
    """
    Settings of a sequential design run

    Parameters
    ----------
    n : int
        Final design size
    n0 : int
        Size of the initial design
    method : {"greedy", "ei"}
        Perturbation rule
    seed : int
        Seed of the random stream
    init : {"random_lhd", "maximin_lhd"}
        Initial design
    scale_outputs : bool
        Rescale outputs to the unit box before every step
    k1 : int, optional
        Neighbors used for midpoints of the approximating set
    k2 : int, optional
        Input neighbors used by the perturbation
    stop_fill : float, optional
        Stop as soon as the global fill estimate drops below this value
    maximin_iters : int
        Draws of the maximin LHD search
    """

    n: int
    n0: int
    method: str = "greedy"
    seed: int = 0
    init: str = "random_lhd"
    scale_outputs: bool = True
    k1: Optional[int] = None
    k2: Optional[int] = None
    stop_fill: Optional[float] = None
    maximin_iters: int = DEFAULT_MAXIMIN_ITERS

    def __post_init__(self) -> None:
        for name in ("n", "n0", "seed", "maximin_iters"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise UsageError(f"{name} must be an integer, got {value!r}")
        if not 2 <= self.n0 <= self.n:
            raise UsageError(f"need 2 <= n0 <= n, got n0={self.n0}, n={self.n}")
        if self.method not in METHODS:
            raise UsageError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.init not in INIT_METHODS:
            raise UsageError(f"init must be one of {INIT_METHODS}, got {self.init!r}")
        if not isinstance(self.scale_outputs, (bool, np.bool_)):
            raise UsageError(f"scale_outputs must be true or false, got {self.scale_outputs!r}")
        if self.seed < 0:
            raise UsageError(f"seed must be non-negative, got {self.seed}")
        if self.maximin_iters < 1:
            raise UsageError(f"maximin_iters must be >= 1, got {self.maximin_iters}")
        for name in ("k1", "k2"):
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise UsageError(f"{name} must be a positive integer, got {value!r}")
        if self.stop_fill is None:
            return
        if isinstance(self.stop_fill, bool) or not isinstance(
            self.stop_fill, (int, float, np.integer, np.floating)
        ):
            raise UsageError(f"stop_fill must be a number, got {self.stop_fill!r}")
        if not np.isfinite(self.stop_fill):
            raise UsageError(f"stop_fill must be finite, got {self.stop_fill!r}")

    def validate(self, p: int, q: int) -> None:
        """Check the settings against the problem dimensions"""
        if self.n0 < min(p, q) + 1:
            raise UsageError(
                f"n0 must be at least min(p, q) + 1 = {min(p, q) + 1}, got {self.n0}"
            )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "EngineConfig":
        unknown = set(values) - set(cls.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown engine settings: {sorted(unknown)}")
        return cls(**values)


class EngineState:
    """
    Ask/tell state of a sequential design

    Use :meth:`create` to start a run. Each :meth:`ask` must be followed by
    a :meth:`tell` before the next :meth:`ask`.

    Attributes
    ----------
    config : EngineConfig
        Settings of the run
    design : Design
        Runs completed so far
    rng : SeededRng
        Random stream, advanced by the initial design and every step
    initial : ndarray
        The initial design, drawn when the state is created
    pending : ndarray or None
        Input proposed by the last ask and not yet told
    trace : list[TraceEntry]
        One entry per completed sequential step
    record : FillRecord or None
        Fill record of the current design, available in the sequential phase
    stopped : bool
        True if the stop_fill rule ended the run early
    """

    def __init__(
        self,
        config: EngineConfig,
        design: Design,
        rng: SeededRng,
        initial: FloatArray,
        pending: Optional[FloatArray] = None,
        pending_entry: Optional[TraceEntry] = None,
        trace: Optional[List[TraceEntry]] = None,
        record: Optional[FillRecord] = None,
        stopped: bool = False,
    ) -> None:
        self.config = config
        self.design = design
        self.rng = rng
        self.initial = initial
        self.pending = pending
        self._pending_entry = pending_entry
        self.trace = [] if trace is None else trace
        self.record = record
        self.stopped = stopped
        self._record_seconds = 0.0

    @classmethod
    def create(cls, config: EngineConfig, p: int, q: int) -> "EngineState":
        """
        Start a run and draw its initial design

        Parameters
        ----------
        config : EngineConfig
            Settings of the run
        p : int
            Input dimension
        q : int
            Output dimension

        Returns
        -------
        EngineState
            State with an empty design
        """
        config.validate(p, q)
        rng = SeededRng(config.seed)
        if config.init == "maximin_lhd":
            initial = maximin_lhd(config.n0, p, rng, config.maximin_iters)
        else:
            initial = random_lhd(config.n0, p, rng)
        return cls(config, Design(p, q), rng, initial)

    @property
    def complete(self) -> bool:
        """True when no further input will be proposed"""
        return self.stopped or len(self.design) >= self.config.n

    def ask(self) -> FloatArray:
        """
        Propose the next input

        Returns
        -------
        ndarray
            A row of the initial design while the design is smaller than
            ``n0``, afterwards the perturbation of the run with the largest
            local fill distance

        Raises
        ------
        ProtocolError
            If a proposed input has not been told yet
        UsageError
            If the design is complete
        """
        if self.pending is not None:
            raise ProtocolError("an input is already pending; tell its output first")
        if self.complete:
            raise UsageError("the design is complete")
        m = len(self.design)
        if m < self.config.n0:
            self.pending = self.initial[m].copy()
            return self.pending.copy()
        assert self.record is not None
        start = time.perf_counter()
        proposal = propose(
            self.design.inputs, self.record, self.rng, self.config.method, self.config.k2
        )
        seconds = self._record_seconds + time.perf_counter() - start
        self._pending_entry = TraceEntry(
            m, self.record.i_star, self.record.global_fill, proposal.rule, seconds
        )
        self.pending = proposal.x
        return self.pending.copy()

    def tell(self, y: ArrayLike) -> "EngineState":
        """
        Record the output of the pending input

        Parameters
        ----------
        y : array_like
            Observed output with q finite coordinates

        Returns
        -------
        EngineState
            This state

        Raises
        ------
        ProtocolError
            If nothing is pending or ``y`` has the wrong number of coordinates
        UsageError
            If ``y`` is not finite. The input stays pending.
        """
        if self.pending is None:
            raise ProtocolError("no input is pending; ask first")
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != self.design.q:
            raise ProtocolError(f"expected {self.design.q} output values, got {y.shape[0]}")
        if not np.all(np.isfinite(y)):
            raise UsageError("output contains non-finite values; input kept pending")
        self.design.append(self.pending, y)
        self.pending = None
        if self._pending_entry is not None:
            entry = self._pending_entry
            self.trace.append(entry)
            self._pending_entry = None
            logger.debug(
                "step size=%d i_star=%d fill=%.6g rule=%s",
                entry.size,
                entry.i_star,
                entry.fill,
                entry.rule,
            )
        if self.config.n0 <= len(self.design) < self.config.n:
            self._refresh_record()
        return self

    def _refresh_record(self) -> None:
        start = time.perf_counter()
        self.record = self.fill_record(self.design, self.rng)
        self._record_seconds = time.perf_counter() - start
        stop_fill = self.config.stop_fill
        if stop_fill is not None and self.record.global_fill < stop_fill:
            self.stopped = True
            logger.info(
                "fill estimate %.6g below %.6g at size %d, stopping",
                self.record.global_fill,
                stop_fill,
                len(self.design),
            )

    def fill_record(self, design: Design, rng: SeededRng) -> FillRecord:
        """
        Local fill distances of a design's outputs

        Outputs are rescaled to the unit box first when ``scale_outputs`` is
        set; ``design.scale`` is updated to the scaling used.
        """
        outputs = design.outputs
        if self.config.scale_outputs:
            outputs, design.scale = scale_to_unit_box(outputs)
        approx = approx_gen(outputs, design.p, design.q, rng, self.config.k1)
        return local_fill_distances(outputs, approx)

    def to_dict(self) -> Dict[str, Any]:
        pending: Optional[Dict[str, Any]] = None
        if self.pending is not None:
            entry = self._pending_entry
            pending = {
                "x": self.pending.tolist(),
                "entry": None if entry is None else entry._asdict(),
            }
        return {
            "version": STATE_VERSION,
            "p": self.design.p,
            "q": self.design.q,
            "inputs": self.design.inputs.tolist(),
            "outputs": self.design.outputs.tolist(),
            "pending": pending,
            "config": self.config.to_dict(),
            "rng": self.rng.state,
            "trace": [entry._asdict() for entry in self.trace],
            "initial": self.initial.tolist(),
            "record": None if self.record is None else self.record.to_dict(),
            "stopped": self.stopped,
        }

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "EngineState":
        try:
            if values.get("version", STATE_VERSION) != STATE_VERSION:
                raise UsageError(f"unsupported state version {values['version']}")
            p, q = int(values["p"]), int(values["q"])
            config = EngineConfig.from_dict(values["config"])
            design = Design(p, q, values["inputs"], values["outputs"])
            record = None
            if values["record"] is not None:
                record = FillRecord.from_dict(values["record"])
                if config.scale_outputs:
                    design.scale = ScaleRecord(
                        design.outputs.min(axis=0), design.outputs.max(axis=0)
                    )
            pending = values["pending"]
            pending_x = pending_entry = None
            if pending is not None:
                pending_x = np.asarray(pending["x"], dtype=float)
                if pending["entry"] is not None:
                    pending_entry = TraceEntry(**pending["entry"])
            return cls(
                config,
                design,
                SeededRng.from_state(values["rng"]),
                np.asarray(values["initial"], dtype=float).reshape(-1, p),
                pending_x,
                pending_entry,
                [TraceEntry(**entry) for entry in values["trace"]],
                record,
                bool(values.get("stopped", False)),
            )
        except OSFDError:
            raise
        except (KeyError, TypeError, ValueError) as err:
            raise UsageError(f"invalid engine state: {err}") from err

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EngineState":
        try:
            values = json.loads(text)
        except json.JSONDecodeError as err:
            raise UsageError(f"engine state is not valid JSON: {err}") from err
        return cls.from_dict(values)


def run_osfd(evaluator: Any, config: EngineConfig) -> Tuple[Design, List[TraceEntry]]:
    """
    Build a sequential output space-filling design

    Parameters
    ----------
    evaluator : Evaluator
        Black-box map from the unit hypercube, with ``p``/``q`` attributes
        and called with one input at a time
    config : EngineConfig
        Settings of the run

    Returns
    -------
    design : Design
        The design, of size ``n`` unless the stop_fill rule ended it early
    trace : list[TraceEntry]
        One entry per sequential step

    Raises
    ------
    EvaluatorError
        If the evaluator fails or returns a non-finite output. The error
        carries the partial design and trace.
    """
    state = EngineState.create(config, evaluator.p, evaluator.q)
    while not state.complete:
        x = state.ask()
        try:
            y = np.asarray(evaluator(x), dtype=float).ravel()
        except EvaluatorError as err:
            raise EvaluatorError(str(err), state.design, state.trace) from err
        except Exception as err:
            raise EvaluatorError(
                f"evaluator failed at x={x.tolist()}: {err}", state.design, state.trace
            ) from err
        if y.shape[0] != evaluator.q or not np.all(np.isfinite(y)):
            raise EvaluatorError(
                f"evaluator returned {y.tolist()} at x={x.tolist()}; expected "
                f"{evaluator.q} finite values",
                state.design,
                state.trace,
            )
        state.tell(y)
    return state.design, state.trace
