"""
Negative-transfer gaps between three training regimes that share one algorithm:

    (a) supervised on an l% labeled subset of the target       -> a_labeled
    (b) transfer from the source restricted to shared classes  -> a_shared
    (c) transfer from the full source, outlier classes included -> a_full

    cng = a_labeled - a_shared   (closed negative gap)
    ong = a_shared - a_full      (outlier negative gap)
    png = cng + ong              (partial negative gap, = a_labeled - a_full)

All accuracies are percentages, measured on one evaluation set: the target restricted
to the shared classes, minus the labeled samples regime (a) trains on.
"""
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import replace

from pyafn.data import DomainDataset
from pyafn.data import make_partial
from pyafn.data import restrict_source
from pyafn.data import split_labeled_target
from pyafn.errsys.errors import E002
from pyafn.errsys.errors import E011
from pyafn.errsys.exceptions import AFNException
from pyafn.errsys.exceptions import DataError
from pyafn.errsys.exceptions import NumericDomainError
from pyafn.errsys.tools import Error
from pyafn.objectives import Variant
from pyafn.py_utils import Reporter
from pyafn.train import evaluate
from pyafn.train import run
from pyafn.train import TrainConfig
from result import Err
from result import Ok
from result import Result


@dataclass(frozen=True)
class RobustnessReport:
    variant: str
    l_percent: float
    a_labeled: float
    a_shared: float
    a_full: float
    cng: float
    ong: float
    png: float
    eval_fingerprint: str = ""
    shared_source_fingerprint: str = ""
    full_source_fingerprint: str = ""


def robustness_gaps(a_labeled: float, a_shared: float, a_full: float) -> tuple[float, float, float]:
    """
    (cng, ong, png) from three percent-scale accuracies.

    >>> robustness_gaps(50.0, 50.0, 50.0)
    (0.0, 0.0, 0.0)
    """

    for name, value in (("a_labeled", a_labeled), ("a_shared", a_shared), ("a_full", a_full)):
        if not 0.0 <= value <= 100.0:
            raise NumericDomainError(E002("robustness_gaps", f"{name} = {value} is outside [0, 100]"))

    cng = a_labeled - a_shared
    ong = a_shared - a_full

    return cng, ong, cng + ong


# *- PROTOCOL -* #


@dataclass(frozen=True)
class Regime:
    tag: str
    description: str
    cfg: TrainConfig
    source: DomainDataset


def supervised_config(base_cfg: TrainConfig) -> TrainConfig:
    """
    The same network and optimizer with no adaptation term (regime a).
    """

    objective = replace(base_cfg.objective, variant=Variant.SourceOnly, lam=0.0, ent=False)
    return replace(base_cfg, objective=objective)


def regimes(
    base_cfg: TrainConfig,
    source: DomainDataset,
    target: DomainDataset,
    keep: Sequence[int],
    l_percent: float,
) -> tuple[DomainDataset, list[Regime]]:
    """
    The evaluation set and the three regimes, in order (a), (b), (c).

    The evaluation set holds the shared-class target rows that regime (a) does not
    train on; all three regimes are scored on it.
    """

    _, shared_target = make_partial(source, target, keep)
    labeled, held_out = split_labeled_target(shared_target, l_percent, base_cfg.seed)

    if held_out.n == 0:
        raise DataError(E011(f"held-out target evaluation set at l = {l_percent:g}%", "robustness.l_percent"))

    return held_out, [
        Regime("a", f"supervised on {l_percent:g}% labeled target", supervised_config(base_cfg), labeled),
        Regime("b", "transfer without outlier classes", base_cfg, restrict_source(source, keep)),
        Regime("c", "transfer with outlier classes", base_cfg, source),
    ]


def _labeled(error: Error, regime: Regime) -> Error:
    return replace(error, summary=f"regime ({regime.tag}) {regime.description}: {error.summary}")


def robustness_protocol(
    base_cfg: TrainConfig,
    source: DomainDataset,
    target: DomainDataset,
    keep: Sequence[int],
    l_percent: float,
    *,
    reporter: Reporter | None = None,
    parallel: bool = False,
) -> Result[RobustnessReport, Error]:
    """
    Train the three regimes with identical hyperparameters and seed, evaluate each on
    the shared-class target rows held out of regime (a), and assemble the gaps. Those
    rows are also the unlabeled pool the transfer regimes adapt to.

    With `parallel` the regimes run on separate threads; each run owns its state.
    """

    try:
        eval_set, plan = regimes(base_cfg, source, target, keep, l_percent)
    except AFNException as e:
        return Err(e.error)

    n_classes = max(source.label_space) + 1
    pool = eval_set.unlabeled()

    def train(regime: Regime) -> Result[float, Error]:
        if reporter is not None and not parallel:
            reporter.info(f"regime ({regime.tag}): {regime.description}")

        outcome = run(
            regime.cfg,
            regime.source,
            pool,
            n_classes=n_classes,
            reporter=None if parallel else reporter,
        )

        match outcome:
            case Ok((params, _)):
                return Ok(100.0 * evaluate(params, eval_set).accuracy)
            case Err(error):
                return Err(_labeled(error, regime))

    if parallel:
        with ThreadPoolExecutor(max_workers=len(plan)) as executor:
            outcomes = list(executor.map(train, plan))
    else:
        outcomes = [train(regime) for regime in plan]

    accuracies: list[float] = []

    for outcome in outcomes:
        match outcome:
            case Ok(accuracy):
                accuracies.append(accuracy)
            case Err(error):
                return Err(error)

    a_labeled, a_shared, a_full = accuracies

    try:
        cng, ong, png = robustness_gaps(a_labeled, a_shared, a_full)
    except AFNException as e:
        return Err(e.error)

    return Ok(
        RobustnessReport(
            variant=base_cfg.objective.variant.value,
            l_percent=l_percent,
            a_labeled=a_labeled,
            a_shared=a_shared,
            a_full=a_full,
            cng=cng,
            ong=ong,
            png=png,
            eval_fingerprint=eval_set.fingerprint(),
            shared_source_fingerprint=plan[1].source.fingerprint(),
            full_source_fingerprint=plan[2].source.fingerprint(),
        )
    )
