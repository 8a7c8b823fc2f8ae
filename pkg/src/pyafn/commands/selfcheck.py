"""
`afn selfcheck`: the invariant suite of the numeric core.

Each invariant is a named check returning `(passed, detail)`. `selfcheck.fault=<primitive>`
negates one backward rule for the whole suite, which the gradient checks must catch.
"""
import math
from collections.abc import Callable
from typing import NamedTuple

import numpy as np
from pyafn import autograd as ag
from pyafn.autograd import grad_check_tensors
from pyafn.autograd import inject_fault
from pyafn.autograd import Tape
from pyafn.autograd import Tensor
from pyafn.autograd.tools import primitives
from pyafn.commands.tools import fail
from pyafn.commands.tools import RunSpec
from pyafn.constants import BN_EPS
from pyafn.constants import GRAD_CHECK_TOL
from pyafn.errsys.errors import E006
from pyafn.errsys.errors import E016
from pyafn.metrics import robustness_gaps
from pyafn.nn import Architecture
from pyafn.nn import dropout
from pyafn.nn import DropoutSpec
from pyafn.nn import DropoutVariant
from pyafn.nn import forward
from pyafn.nn import init_params
from pyafn.nn import Mode
from pyafn.nn import ModelParams
from pyafn.objectives import cross_entropy
from pyafn.objectives import entropy_min
from pyafn.objectives import hafn
from pyafn.objectives import hafn_penalty
from pyafn.objectives import mmfnd
from pyafn.objectives import ObjectiveConfig
from pyafn.objectives import safn_penalty
from pyafn.objectives import safn_targets
from pyafn.objectives import Variant


GRAD_SEEDS = range(10)
MONTE_CARLO_MASKS = 100_000


class Outcome(NamedTuple):
    name: str
    passed: bool
    detail: str


# *- GRADIENT SUITE -* #


class Toy(NamedTuple):
    params: ModelParams
    x_s: np.ndarray
    x_t: np.ndarray
    labels: np.ndarray


def make_toy(seed: int) -> Toy:
    """
    A small random model in eval mode (frozen BN statistics, dropout off) and two batches.
    """

    rng = np.random.default_rng(seed)
    arch = Architecture(input_dim=5, n_classes=3, hidden=(6,), embedding_size=4, dropout_p=0.0)
    params = init_params(arch, rng)

    for block in params.f_blocks:
        block.bn.running_mean = rng.normal(0.0, 0.1, block.bn.width)
        block.bn.running_var = rng.uniform(0.5, 1.5, block.bn.width)

    return Toy(params, rng.standard_normal((6, 5)), rng.standard_normal((5, 5)), rng.integers(0, 3, 6))


def _features(toy: Toy) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    f_s, logits_s = forward(toy.x_s, toy.params, Mode.Eval)
    f_t, logits_t = forward(toy.x_t, toy.params, Mode.Eval)
    return f_s, f_t, logits_s, logits_t


def _pinned_safn(toy: Toy, delta_r: float, radius: float | None) -> Callable[[], Tensor]:
    f_s, f_t, _, _ = _features(toy)
    pinned = tuple(safn_targets(np.linalg.norm(f.values, axis=1), delta_r, radius) for f in (f_s, f_t))

    def loss() -> Tensor:
        f_s, f_t, logits_s, _ = _features(toy)
        penalty = safn_penalty(f_s, f_t, delta_r, radius, targets=pinned)
        return ag.add(cross_entropy(logits_s, toy.labels), penalty)

    return loss


def objective_losses(toy: Toy) -> dict[str, Callable[[], Tensor]]:
    """
    Scalar losses of the toy model, rebuilt from the current parameter values on every call.

    The SAFN targets are pinned at the starting point.
    """

    hafn_cfg = ObjectiveConfig(Variant.Hafn, lam=1.0, radius=3.0)

    def ce() -> Tensor:
        _, _, logits_s, _ = _features(toy)
        return cross_entropy(logits_s, toy.labels)

    def hafn_loss() -> Tensor:
        f_s, f_t, logits_s, _ = _features(toy)
        return hafn(f_s, f_t, logits_s, toy.labels, hafn_cfg)

    def ent() -> Tensor:
        _, _, _, logits_t = _features(toy)
        return entropy_min(logits_t)

    return {
        "cross_entropy": ce,
        "hafn": hafn_loss,
        "safn": _pinned_safn(toy, 1.0, None),
        "safn_capped": _pinned_safn(toy, 1.0, 2.0),
        "entropy_min": ent,
    }


def check_objective_gradients() -> list[Outcome]:
    worst: dict[str, tuple[float, str]] = {}

    for seed in GRAD_SEEDS:
        toy = make_toy(seed)

        for name, loss in objective_losses(toy).items():
            check = grad_check_tensors(loss, toy.params.tensors())
            error = math.inf if check.nan_at is not None else check.max_error

            if name not in worst or error > worst[name][0]:
                worst[name] = (error, f"{check.describe()} (seed {seed})")

    return [
        Outcome(f"grad_check.{name}", error < GRAD_CHECK_TOL, detail)
        for name, (error, detail) in worst.items()
    ]


def check_batchnorm_gradient() -> Outcome:
    rng = np.random.default_rng(0)
    x = Tensor.parameter(rng.standard_normal((6, 4)), "x")
    gamma = Tensor.parameter(rng.uniform(0.5, 1.5, 4), "gamma")
    beta = Tensor.parameter(rng.standard_normal(4), "beta")
    weights = Tensor.constant(rng.standard_normal((6, 4)))

    def loss() -> Tensor:
        return ag.sum(ag.mul(ag.batchnorm(x, gamma, beta, eps=BN_EPS), weights))

    check = grad_check_tensors(loss, [x, gamma, beta])

    return Outcome("grad_check.batchnorm_train", check.passed(), check.describe())


# *- DROPOUT AND NORM PROPERTIES -* #


def check_dropout_preservation() -> list[Outcome]:
    rng = np.random.default_rng(0)
    x = rng.uniform(0.5, 2.0, 8)
    batch = Tensor.constant(np.tile(x, (MONTE_CARLO_MASKS, 1)))
    outcomes = []

    for variant, statistic in (
        (DropoutVariant.L1Preserving, lambda v: np.sum(np.abs(v), axis=-1)),
        (DropoutVariant.L2Preserving, lambda v: np.sum(v * v, axis=-1)),
    ):
        for p in (0.1, 0.5):
            dropped = dropout(batch, DropoutSpec(p, Mode.Train, variant), rng).values
            expected = float(statistic(x))
            error = abs(float(np.mean(statistic(dropped))) - expected) / expected
            outcomes.append(
                Outcome(f"dropout.{variant.value}.p={p}", error < 0.02, f"relative error {error:.2e}")
            )

    return outcomes


def check_safn_identity() -> Outcome:
    rng = np.random.default_rng(1)
    delta_r = 1.0
    f_s = Tensor.parameter(rng.standard_normal((4, 3)), "f_s")
    f_t = Tensor.parameter(rng.standard_normal((5, 3)), "f_t")
    n = 9

    with Tape() as tape:
        penalty = safn_penalty(f_s, f_t, delta_r)

    value_error = abs(penalty.item() - delta_r**2)
    ag.backward(tape, penalty)

    assert f_s.grad is not None and f_t.grad is not None
    inner = np.concatenate([np.sum(f_s.grad * f_s.values, axis=1), np.sum(f_t.grad * f_t.values, axis=1)])
    norms = np.concatenate([np.linalg.norm(f_s.values, axis=1), np.linalg.norm(f_t.values, axis=1)])
    grad_error = float(np.max(np.abs(inner + 2.0 * delta_r * norms / n)))

    passed = value_error < 1e-12 and grad_error < 1e-8
    return Outcome("safn.identity", passed, f"value error {value_error:.1e}, gradient error {grad_error:.1e}")


def check_hafn_restoring_force() -> Outcome:
    rng = np.random.default_rng(2)
    radius = 5.0
    directions = []

    for scale in (0.5, 2.0):
        f = rng.standard_normal((6, 3))
        f *= scale * radius / np.linalg.norm(f, axis=1, keepdims=True)
        f_s, f_t = Tensor.parameter(f.copy(), "f_s"), Tensor.parameter(f.copy(), "f_t")

        with Tape() as tape:
            penalty = hafn_penalty(f_s, f_t, radius)

        ag.backward(tape, penalty)
        assert f_s.grad is not None
        directions.append(float(np.sum(f_s.grad * f_s.values)))

    below, above = directions
    passed = below < 0.0 < above

    return Outcome("hafn.restoring_force", passed, f"<grad, f> = {below:.3g} below R, {above:.3g} above R")


def check_mmfnd_antisymmetry() -> Outcome:
    rng = np.random.default_rng(3)
    a, b = rng.uniform(0.0, 5.0, 7), rng.uniform(0.0, 5.0, 5)
    gap = mmfnd(a, b) + mmfnd(b, a)

    return Outcome("mmfnd.antisymmetry", gap == 0.0 and mmfnd(a, a) == 0.0, f"mmfnd(a, b) + mmfnd(b, a) = {gap}")


def check_robustness_identity() -> Outcome:
    rows = [(50.0, 45.0, 29.4, 20.6), (70.0, 51.3, 26.3, 43.7)]
    details = []
    passed = True

    for a_labeled, a_shared, a_full, png_expected in rows:
        cng, ong, png = robustness_gaps(a_labeled, a_shared, a_full)
        passed &= png == cng + ong and math.isclose(png, png_expected, abs_tol=1e-9)
        details.append(f"{cng:.1f} + {ong:.1f} = {png:.1f}")

    return Outcome("robustness.identity", passed, ", ".join(details))


def run_invariants() -> list[Outcome]:
    return [
        *check_objective_gradients(),
        check_batchnorm_gradient(),
        *check_dropout_preservation(),
        check_safn_identity(),
        check_hafn_restoring_force(),
        check_mmfnd_antisymmetry(),
        check_robustness_identity(),
    ]


def cmd_selfcheck(spec: RunSpec) -> int:
    fault = spec.config["selfcheck.fault"]

    if fault and fault not in primitives:
        return fail(E006("selfcheck.fault", f"unknown primitive {fault!r}; known: {', '.join(sorted(primitives))}"))

    if fault:
        spec.reporter.warn(f"backward rule of `{fault}` negated")
        with inject_fault(fault):
            outcomes = run_invariants()
    else:
        outcomes = run_invariants()

    for outcome in outcomes:
        if outcome.passed:
            spec.reporter.detail(f"ok    {outcome.name}: {outcome.detail}")
        else:
            spec.reporter.failure(f"FAIL  {outcome.name}: {outcome.detail}")

    failed = [outcome for outcome in outcomes if not outcome.passed]

    if failed:
        return fail([E016(outcome.name, outcome.detail) for outcome in failed])

    spec.reporter.success(f"all {len(outcomes)} invariants hold")

    return 0
