"""
Black-box evaluators.

An evaluator maps one input of the unit hypercube ``[0, 1]^p`` to one
output in ``R^q``. :class:`FunctionEvaluator` wraps an in-process callable
and :class:`SubprocessEvaluator` talks to a long-running child process
through a line protocol: one line of ``p`` space-separated decimals is
written to the child's standard input and one line of ``q`` space-separated
decimals is read back from its standard output.
"""
import abc
import logging
import queue
import shlex
import subprocess
import threading
from typing import IO, Callable, List, Optional, Sequence, Union

import numpy as np

from osfd.exceptions import EvaluatorError, UsageError
from osfd.typing import ArrayLike, FloatArray

__all__ = ["Evaluator", "FunctionEvaluator", "SubprocessEvaluator", "format_point"]

logger = logging.getLogger(__name__)


def format_point(x: ArrayLike) -> str:
    """Space-separated decimals with 17 significant digits"""
    return " ".join(f"{v:.17g}" for v in np.asarray(x, dtype=float).ravel())


class Evaluator(abc.ABC):
    """
    Map from the unit hypercube to the output space

    Parameters
    ----------
    p : int
        Input dimension
    q : int
        Output dimension
    """

    def __init__(self, p: int, q: int) -> None:
        if p < 1 or q < 1:
            raise UsageError(f"p and q must be positive, got p={p}, q={q}")
        self.p = p
        self.q = q

    @abc.abstractmethod
    def evaluate(self, x: FloatArray) -> ArrayLike:
        """Output at a single input"""

    def __call__(self, x: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.p:
            raise UsageError(f"expected an input with {self.p} coordinates, got {x.shape[0]}")
        y = np.asarray(self.evaluate(x), dtype=float).ravel()
        if y.shape[0] != self.q:
            raise EvaluatorError(f"expected {self.q} output values, got {y.shape[0]}")
        if not np.all(np.isfinite(y)):
            raise EvaluatorError(f"non-finite output {y.tolist()} at x={x.tolist()}")
        return y

    def close(self) -> None:
        """Release resources held by the evaluator"""

    def __enter__(self) -> "Evaluator":
        return self

    def __exit__(self, *args: object) -> None:
        self.close()


class FunctionEvaluator(Evaluator):
    """
    FunctionEvaluator(func, p, q)

    Evaluator backed by a Python callable

    Parameters
    ----------
    func : callable
        Function taking an input vector of length p
    p : int
        Input dimension
    q : int
        Output dimension
    """

    def __init__(self, func: Callable[[FloatArray], ArrayLike], p: int, q: int) -> None:
        super().__init__(p, q)
        self.func = func

    def evaluate(self, x: FloatArray) -> ArrayLike:
        return self.func(x)


class SubprocessEvaluator(Evaluator):
    """
    SubprocessEvaluator(command, p, q, timeout=None)

    Evaluator backed by a child process

    Parameters
    ----------
    command : {str, Sequence[str]}
        Command line of the child. A string is split with shell rules.
    p : int
        Input dimension
    q : int
        Output dimension
    timeout : float, optional
        Seconds to wait for each reply. The child is killed and
        :class:`~osfd.exceptions.EvaluatorError` is raised when it stays
        silent for longer. Wait forever if None.

    Notes
    -----
    The child is started on the first evaluation and persists until
    :meth:`close`. It must flush its output after every line.
    """

    def __init__(
        self,
        command: Union[str, Sequence[str]],
        p: int,
        q: int,
        timeout: Optional[float] = None,
    ) -> None:
        super().__init__(p, q)
        self.command: List[str] = (
            shlex.split(command) if isinstance(command, str) else list(command)
        )
        if not self.command:
            raise UsageError("subprocess command is empty")
        if timeout is not None and not 0 < timeout < np.inf:
            raise UsageError(f"timeout must be positive, got {timeout!r}")
        self.timeout = timeout
        self._process: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[str]" = queue.Queue()
        self._reader: Optional[threading.Thread] = None

    @staticmethod
    def _pump(stream: IO[str], lines: "queue.Queue[str]") -> None:
        try:
            for line in stream:
                lines.put(line)
        except (OSError, ValueError):
            pass
        finally:
            # empty string marks end of output
            lines.put("")
            stream.close()

    def _start(self) -> subprocess.Popen:
        if self._process is None or self._process.poll() is not None:
            logger.info("starting evaluator: %s", " ".join(self.command))
            try:
                self._process = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as err:
                raise EvaluatorError(f"cannot start evaluator {self.command!r}: {err}") from err
            self._lines = queue.Queue()
            self._reader = threading.Thread(
                target=self._pump, args=(self._process.stdout, self._lines), daemon=True
            )
            self._reader.start()
        return self._process

    def evaluate(self, x: FloatArray) -> ArrayLike:
        process = self._start()
        assert process.stdin is not None
        try:
            process.stdin.write(format_point(x) + "\n")
            process.stdin.flush()
        except (BrokenPipeError, OSError) as err:
            raise EvaluatorError(f"evaluator pipe failed: {err}") from err
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            logger.warning("evaluator silent for %s s, killing it", self.timeout)
            self._kill()
            raise EvaluatorError(
                f"evaluator gave no output within {self.timeout} s at x={x.tolist()}"
            ) from None
        if not line:
            code = process.poll()
            raise EvaluatorError(f"evaluator closed its output (exit code {code})")
        try:
            return [float(v) for v in line.split()]
        except ValueError as err:
            raise EvaluatorError(f"cannot parse evaluator output {line.strip()!r}") from err

    def _kill(self) -> None:
        process, self._process = self._process, None
        if process is None:
            return
        process.kill()
        process.wait()
        if process.stdin is not None:
            try:
                process.stdin.close()
            except OSError:
                pass
        self._join_reader()

    def _join_reader(self) -> None:
        reader, self._reader = self._reader, None
        if reader is not None:
            reader.join(timeout=5)

    def close(self) -> None:
        process, self._process = self._process, None
        if process is None:
            return
        if process.stdin is not None:
            try:
                process.stdin.close()
            except OSError:
                pass
        try:
            process.wait(timeout=5)
        except subprocess.TimeoutExpired:
            process.kill()
            process.wait()
        self._join_reader()
