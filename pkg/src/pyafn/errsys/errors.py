"""
Here are defined all the errors that could be raised or returned, one constructor per code.
"""
from collections.abc import Iterable

from pyafn.errsys.tools import Error
from pyafn.errsys.tools import ErrorKind


def _shape(shape: Iterable[int]) -> str:
    return "[" + "×".join(map(str, shape)) + "]"


# E001: dimension mismatch
def E001(op: str, left: tuple[int, ...], right: tuple[int, ...]) -> Error:
    """
    # E001: dimension mismatch

    ## Example

    >>> matmul(Tensor[2×3], Tensor[4×1])

    the inner dimensions 3 and 4 do not agree.
    """

    summary = f"dimension mismatch in `{op}`: {_shape(left)} vs {_shape(right)}"

    return Error("E001", ErrorKind.Numeric, summary)


# E002: numeric domain violation
def E002(op: str, detail: str) -> Error:
    """
    # E002: numeric domain violation

    ## Example

    >>> log(Tensor([0.0]))

    `log` is undefined at nonpositive values.
    """

    summary = f"numeric domain violation in `{op}`: {detail}"

    return Error("E002", ErrorKind.Numeric, summary)


# E003: rank mismatch
def E003(op: str, expected: int, shape: tuple[int, ...]) -> Error:
    """
    # E003: rank mismatch

    ## Example

    >>> row_l2_norm(Tensor[8])

    `row_l2_norm` expects a batch × features matrix.
    """

    summary = f"`{op}` expects a rank-{expected} tensor, found {_shape(shape)}"

    return Error("E003", ErrorKind.Numeric, summary)


# E004: non-scalar loss
def E004(shape: tuple[int, ...]) -> Error:
    """
    # E004: non-scalar loss

    `backward` was called on a tensor that is not a scalar.
    """

    summary = f"backward expects a scalar loss, found {_shape(shape)}"
    hint = "reduce the loss with `sum` or `mean` first"

    return Error("E004", ErrorKind.Internal, summary, hint_message=hint)


# E005: tape state error
def E005(reason: str) -> Error:
    """
    # E005: tape state error

    ## Example

    >>> backward(tape, loss); backward(tape, loss)

    a tape can only be consumed once until it is reset.
    """

    summary = f"tape state error: {reason}"
    hint = "call `tape.reset()` or record a new tape"

    return Error("E005", ErrorKind.Internal, summary, hint_message=hint)


# E006: invalid configuration value
def E006(key: str, reason: str, location: str | None = None) -> Error:
    """
    # E006: invalid configuration value

    ## Example

    >>> model.dropout_p = 1.0

    the drop probability must lie in [0, 1).
    """

    summary = f"invalid value for `{key}`: {reason}"

    return Error("E006", ErrorKind.Config, summary, location)


# E007: unknown configuration key
def E007(key: str, location: str | None, candidates: list[str]) -> Error:
    """
    # E007: unknown configuration key

    ## Example

    >>> objective.lamda = 0.05

    `objective.lamda` is not a known key.
    """

    summary = f"unknown configuration key `{key}`"
    hint = "did you mean one of the following?" if candidates else None

    return Error(
        "E007",
        ErrorKind.Config,
        summary,
        location,
        hint_message=hint,
        candidate_messages=[f"`{c}`" for c in candidates],
    )


# E008: malformed CSV header
def E008(path: str, found: list[str], expected: str) -> Error:
    """
    # E008: malformed CSV header

    ## Example

    >>> x0,x1,label

    the header must read `f0,...,f{d-1},label,domain`.
    """

    summary = f"malformed header {','.join(found)!r}"
    hint = f"expected {expected}"

    return Error("E008", ErrorKind.Data, summary, f"{path}:1", hint_message=hint)


# E009: invalid CSV cell
def E009(path: str, line: int, column: str, cell: str) -> Error:
    """
    # E009: invalid CSV cell

    ## Example

    >>> 0.5,abc,1,source

    `abc` is not a number.
    """

    summary = f"invalid value {cell!r} in column `{column}`"

    return Error("E009", ErrorKind.Data, summary, f"{path}:{line}")


# E010: label outside label space
def E010(label: int, where: str, label_space: Iterable[int]) -> Error:
    """
    # E010: label outside label space

    ## Example

    >>> cross_entropy(logits[5×3], labels=[0, 1, 3, 0, 2])

    label 3 does not index one of the 3 classes (sample 2).
    """

    summary = f"label {label} is outside the label space {sorted(label_space)}"

    return Error("E010", ErrorKind.Data, summary, where)


# E011: empty or missing data
def E011(what: str, location: str | None = None) -> Error:
    """
    # E011: empty or missing data

    ## Example

    >>> mmfnd(Tensor[0], Tensor[4])

    the source norms are empty.
    """

    summary = f"empty or missing data: {what}"

    return Error("E011", ErrorKind.Data, summary, location)


# E012: checkpoint format error
def E012(path: str, reason: str, line: int | None = None) -> Error:
    """
    # E012: checkpoint format error

    ## Example

    A checkpoint truncated in the middle of a tensor, written by another
    format version, or whose tensors do not match its architecture line.
    """

    location = path if line is None else f"{path}:{line}"
    summary = f"checkpoint format error: {reason}"

    return Error("E012", ErrorKind.Data, summary, location)


# E013: numerical abort
def E013(iteration: int, last_good: str | None) -> Error:
    """
    # E013: numerical abort

    The training loss became NaN or infinite; the run stops instead of
    clamping.
    """

    summary = f"non-finite loss at iteration {iteration}"
    hint = (
        f"last good checkpoint: {last_good}"
        if last_good
        else "no checkpoint was written before the abort"
    )

    return Error("E013", ErrorKind.Numeric, summary, hint_message=hint)


# E014: missing gradient
def E014(name: str) -> Error:
    """
    # E014: missing gradient

    A learnable tensor had no gradient when the optimizer stepped, which
    means backward was skipped or the tensor is detached from the loss.
    """

    summary = f"learnable tensor `{name}` has no gradient"

    return Error("E014", ErrorKind.Internal, summary)


# E015: unwritable output path
def E015(path: str, reason: str) -> Error:
    """
    # E015: unwritable output path
    """

    summary = f"cannot write {path}: {reason}"

    return Error("E015", ErrorKind.Data, summary, path)


# E016: self-check failure
def E016(invariant: str, detail: str) -> Error:
    """
    # E016: self-check failure

    One of the named invariants of `afn selfcheck` did not hold.
    """

    summary = f"invariant `{invariant}` failed: {detail}"

    return Error("E016", ErrorKind.Internal, summary)


# E017: degenerate batch
def E017(op: str, size: int) -> Error:
    """
    # E017: degenerate batch

    ## Example

    >>> batchnorm(Tensor[1×4], state in train mode)

    the variance of a single sample is degenerate.
    """

    summary = f"`{op}` in train mode needs a batch of at least 2 samples, got {size}"

    return Error("E017", ErrorKind.Numeric, summary)


# E018: domains disagree on the feature dimension
def E018(source_dim: int, target_dim: int) -> Error:
    """
    # E018: domains disagree on the feature dimension

    ## Example

    A 16-column source CSV paired with an 8-column target CSV.
    """

    summary = f"source has {source_dim} features but target has {target_dim}"

    return Error("E018", ErrorKind.Data, summary)
