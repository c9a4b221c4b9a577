"""
Metropolis-within-Gibbs sampler for the latent class meta-analysis models.

The target condition is marginalized out of the likelihood, so the state holds
only study prevalences, study logit accuracies and the per-test
hyperparameters. One sweep updates, in order:

1. each study's prevalence (random walk on the logit scale),
2. each study's logit Se and logit Sp of both tests (random walk, one
   coordinate at a time, all studies at once),
3. each test's population means (exact bivariate normal draw, truncated when
   constraints apply),
4. each test's standard deviations (random walk on a transformed scale),
5. each test's correlation (random walk on atanh rho) unless fixed.

Studies are independent given the hyperparameters, so the per-study updates in
steps 1 and 2 are vectorized: every study gets its own proposal and its own
accept/reject decision. Proposal scales are adapted in windows during burn-in
only and frozen afterwards.

Array layout: ``theta[study, test, measure]`` with test 0 the reference
standard, test 1 the index test, measure 0 sensitivity and 1 specificity.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, Optional, Protocol, Tuple

import numpy as np
from scipy.special import expit, logit
from scipy.stats import truncnorm

from .priors import HyperPriors, bivariate_normal_logpdf, log_prior, sigma_log_density

logger = logging.getLogger(__name__)

TEST_REF, TEST_INDEX = 0, 1
SE, SP = 0, 1
TEST_NAMES = ("ref", "index")
MEASURE_NAMES = ("se", "sp")

ALL_BLOCKS = ("prev", "accuracy", "mu", "sigma", "rho")

# Population-level quantities gated on convergence.
MONITORED_PARAMETERS = (
    "mean_se_index",
    "mean_sp_index",
    "mean_se_ref",
    "mean_sp_ref",
    "sigma_se_index",
    "sigma_sp_index",
    "sigma_se_ref",
    "sigma_sp_ref",
)
REPORTED_PARAMETERS = MONITORED_PARAMETERS + ("rho_index", "rho_ref")

# Separates chain streams from study streams built on the same seed.
_CHAIN_STREAM_KEY = 0x5EED
_MAX_REJECTION_TRIES = 100
_INITIAL_SCALE = 0.3
_INIT_JITTER = 0.1


class StudyData(Protocol):
    """What the sampler needs from a dataset."""

    @property
    def n_studies(self) -> int: ...

    def study_log_likelihoods(self, prev, ref_se, ref_sp, index_se, index_sp) -> np.ndarray: ...

    def initial_estimates(self) -> Dict[str, np.ndarray]: ...


def chain_stream(seed: int, chain_index: int) -> np.random.Generator:
    """Independent random stream of one chain, fixed by (seed, chain_index)."""
    if seed < 0 or chain_index < 0:
        raise ValueError(f"Seeds and chain indices must be non-negative ({seed}, {chain_index})")
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(_CHAIN_STREAM_KEY, chain_index))
    )


@dataclass(frozen=True)
class McmcConfig:
    """
    Sampler settings.

    Attributes:
        n_chains: Independent chains
        n_iters: Iterations per chain, burn-in included
        n_burnin: Leading iterations discarded (and used for adaptation)
        thin: Keep every ``thin``-th post-burn-in iteration
        adapt_window: Iterations per proposal-scale adaptation step
        seed: Seed of the chain streams
        enforce_dv_gt_1: Require mean Se + mean Sp > 1 for each test
        fix_rho: Hold both correlations at their initial value (0)
        target_accept: Acceptance rate the adaptation aims for
        rhat_threshold: Largest R-hat still reported as converged
        blocks: Parameter blocks that are updated; the others stay at their
            initial values. The hierarchy (mu, sigma, rho) is only updated
            together with ``accuracy``.
    """

    n_chains: int = 3
    n_iters: int = 50000
    n_burnin: int = 25000
    thin: int = 5
    adapt_window: int = 100
    seed: int = 0
    enforce_dv_gt_1: bool = True
    fix_rho: bool = False
    target_accept: float = 0.44
    rhat_threshold: float = 1.1
    blocks: Tuple[str, ...] = ALL_BLOCKS

    def __post_init__(self):
        if self.n_chains < 1:
            raise ValueError(f"n_chains must be at least 1, got {self.n_chains}")
        if self.n_iters < 1:
            raise ValueError(f"n_iters must be at least 1, got {self.n_iters}")
        if not 0 <= self.n_burnin < self.n_iters:
            raise ValueError(
                f"n_burnin must be in [0, n_iters), got {self.n_burnin} with n_iters={self.n_iters}"
            )
        if self.thin < 1:
            raise ValueError(f"thin must be at least 1, got {self.thin}")
        if self.adapt_window < 1:
            raise ValueError(f"adapt_window must be at least 1, got {self.adapt_window}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError(f"target_accept must be in (0, 1), got {self.target_accept}")
        unknown = set(self.blocks) - set(ALL_BLOCKS)
        if unknown:
            raise ValueError(f"Unknown sampler block(s) {sorted(unknown)}; known: {ALL_BLOCKS}")

    @property
    def n_kept(self) -> int:
        """Draws kept per chain."""
        return -(-(self.n_iters - self.n_burnin) // self.thin)

    @property
    def hierarchical(self) -> bool:
        return "accuracy" in self.blocks

    def with_overrides(self, **overrides) -> "McmcConfig":
        return replace(self, **overrides)


@dataclass
class LcbmState:
    """
    One point of the parameter space.

    Attributes:
        prev: Study prevalences, shape (n_studies,)
        theta: Study logit accuracies, shape (n_studies, 2, 2)
        mu: Population logit means, shape (2, 2)
        sigma: Population standard deviations, shape (2, 2)
        rho: Within-test correlation of logit Se and logit Sp, shape (2,)
    """

    prev: np.ndarray
    theta: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        n = self.prev.shape[0]
        if self.theta.shape != (n, 2, 2):
            raise ValueError(f"theta must have shape ({n}, 2, 2), got {self.theta.shape}")
        if self.mu.shape != (2, 2) or self.sigma.shape != (2, 2) or self.rho.shape != (2,):
            raise ValueError("mu and sigma must have shape (2, 2) and rho shape (2,)")

    @property
    def n_studies(self) -> int:
        return int(self.prev.shape[0])

    @property
    def accuracy(self) -> np.ndarray:
        return expit(self.theta)

    @property
    def ref_se(self) -> np.ndarray:
        return expit(self.theta[:, TEST_REF, SE])

    @property
    def ref_sp(self) -> np.ndarray:
        return expit(self.theta[:, TEST_REF, SP])

    @property
    def index_se(self) -> np.ndarray:
        return expit(self.theta[:, TEST_INDEX, SE])

    @property
    def index_sp(self) -> np.ndarray:
        return expit(self.theta[:, TEST_INDEX, SP])

    def copy(self) -> "LcbmState":
        return LcbmState(
            prev=self.prev.copy(),
            theta=self.theta.copy(),
            mu=self.mu.copy(),
            sigma=self.sigma.copy(),
            rho=self.rho.copy(),
        )

    @classmethod
    def from_probabilities(
        cls,
        prev,
        ref_se,
        ref_sp,
        index_se,
        index_sp,
        mu: Optional[np.ndarray] = None,
        sigma: Optional[np.ndarray] = None,
        rho: Optional[np.ndarray] = None,
    ) -> "LcbmState":
        """
        Build a state from probability-scale study values.

        Accuracies of exactly 0 or 1 map to infinite logits, which is how a
        test is held perfect in a run that does not update accuracies.
        """
        prev = np.asarray(prev, dtype=float).reshape(-1)
        n = prev.shape[0]
        theta = np.empty((n, 2, 2))
        with np.errstate(divide="ignore"):
            for (test, measure), values in {
                (TEST_REF, SE): ref_se,
                (TEST_REF, SP): ref_sp,
                (TEST_INDEX, SE): index_se,
                (TEST_INDEX, SP): index_sp,
            }.items():
                theta[:, test, measure] = logit(np.broadcast_to(np.asarray(values, dtype=float), (n,)))
        return cls(
            prev=prev,
            theta=theta,
            mu=np.zeros((2, 2)) if mu is None else np.asarray(mu, dtype=float),
            sigma=np.ones((2, 2)) if sigma is None else np.asarray(sigma, dtype=float),
            rho=np.zeros(2) if rho is None else np.asarray(rho, dtype=float),
        )


@dataclass
class ChainSamples:
    """
    Post-burn-in, thinned draws of one chain.

    Attributes:
        chain_index: Index of the chain
        prev: Study prevalences, shape (n_draws, n_studies)
        accuracy: Study accuracies on the probability scale, shape (n_draws, n_studies, 2, 2)
        mu: Population logit means, shape (n_draws, 2, 2)
        sigma: Population standard deviations, shape (n_draws, 2, 2)
        rho: Correlations, shape (n_draws, 2)
        acceptance: Post-burn-in Metropolis acceptance rate per block
    """

    chain_index: int
    prev: np.ndarray
    accuracy: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    acceptance: Dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.prev.shape[0])

    def parameter(self, name: str) -> np.ndarray:
        """
        Draws of one reported population parameter.

        Args:
            name: One of :data:`REPORTED_PARAMETERS`; means are on the probability scale

        Raises:
            KeyError: If the name is unknown
        """
        kind, _, rest = name.partition("_")
        if kind == "rho" and rest in TEST_NAMES:
            return self.rho[:, TEST_NAMES.index(rest)]
        measure, _, test = rest.partition("_")
        if kind in ("mean", "sigma") and measure in MEASURE_NAMES and test in TEST_NAMES:
            idx = (slice(None), TEST_NAMES.index(test), MEASURE_NAMES.index(measure))
            return expit(self.mu[idx]) if kind == "mean" else self.sigma[idx]
        raise KeyError(f"Unknown parameter '{name}'. Expected one of: {', '.join(REPORTED_PARAMETERS)}")

    def states(self) -> Iterator[LcbmState]:
        """The stored draws as states, in sampling order."""
        with np.errstate(divide="ignore"):
            theta = logit(self.accuracy)
        for j in range(len(self)):
            yield LcbmState(
                prev=self.prev[j],
                theta=theta[j],
                mu=self.mu[j],
                sigma=self.sigma[j],
                rho=self.rho[j],
            )


def initial_state(
    dataset: StudyData, priors: HyperPriors, config: McmcConfig, rng: np.random.Generator
) -> LcbmState:
    """
    Starting point near the naive study estimates, jittered on the logit scale.

    Population means start at the mean study logits, shifted when needed to
    satisfy the mean constraints; standard deviations start at the spread of
    the study logits and correlations at 0.
    """
    estimates = dataset.initial_estimates()
    n = dataset.n_studies

    def jittered_logit(values):
        return logit(np.clip(values, 0.02, 0.98)) + rng.normal(0.0, _INIT_JITTER, size=n)

    prev = expit(jittered_logit(estimates["prev"]))
    theta = np.empty((n, 2, 2))
    theta[:, TEST_REF, SE] = jittered_logit(estimates["ref_se"])
    theta[:, TEST_REF, SP] = jittered_logit(estimates["ref_sp"])
    theta[:, TEST_INDEX, SE] = jittered_logit(estimates["index_se"])
    theta[:, TEST_INDEX, SP] = jittered_logit(estimates["index_sp"])

    mu = theta.mean(axis=0)
    for test in (TEST_REF, TEST_INDEX):
        if priors.sp_mean_positive and mu[test, SP] <= 0:
            mu[test, SP] = 0.1
        if config.enforce_dv_gt_1 and mu[test, SE] + mu[test, SP] <= 0:
            mu[test, SE] = -mu[test, SP] + 0.1
    spread = theta.std(axis=0, ddof=1) if n > 1 else np.ones((2, 2))
    sigma = np.clip(spread, 0.1, min(1.5, 0.75 * priors.sigma_upper))
    return LcbmState(prev=prev, theta=theta, mu=mu, sigma=sigma, rho=np.zeros(2))


class MetropolisWithinGibbs:
    """
    One chain of the sampler.

    Args:
        dataset: Study data providing per-study log-likelihoods
        config: Sampler settings
        priors: Hyperprior settings
        rng: Random stream of the chain
        state: Starting state; drawn by :func:`initial_state` when None

    Raises:
        RuntimeError: If the posterior is not finite at the starting state
    """

    def __init__(
        self,
        dataset: StudyData,
        config: McmcConfig,
        priors: HyperPriors,
        rng: np.random.Generator,
        state: Optional[LcbmState] = None,
    ):
        self.dataset = dataset
        self.config = config
        self.priors = priors
        self.rng = rng
        self.state = state.copy() if state is not None else initial_state(dataset, priors, config, rng)
        if self.state.n_studies != dataset.n_studies:
            raise ValueError(
                f"Initial state has {self.state.n_studies} studies, dataset has {dataset.n_studies}"
            )

        self.blocks = set(config.blocks)
        self.hierarchical = config.hierarchical
        if not self.hierarchical:
            self.blocks -= {"mu", "sigma", "rho"}
        if config.fix_rho:
            self.blocks.discard("rho")

        n = self.state.n_studies
        self.log_scales = {
            "prev": np.full(n, math.log(_INITIAL_SCALE)),
            "accuracy": np.full((n, 2, 2), math.log(_INITIAL_SCALE)),
            "sigma": np.full((2, 2), math.log(_INITIAL_SCALE)),
            "rho": np.full(2, math.log(_INITIAL_SCALE)),
        }
        self._window_accepts = {k: np.zeros_like(v) for k, v in self.log_scales.items()}
        self._accepted = {k: 0.0 for k in self.log_scales}
        self._proposed = {k: 0 for k in self.log_scales}
        self._adapt_step = 0

        self._ll = self._log_likelihoods(self.state.prev, self.state.theta)
        self._hier = np.zeros((n, 2))
        if self.hierarchical:
            for test in (TEST_REF, TEST_INDEX):
                self._hier[:, test] = self._hier_logpdf(self.state.theta, self.state.sigma, self.state.rho, test)
        self._check_initial_state()

    def _check_initial_state(self) -> None:
        problems = []
        if not np.all(np.isfinite(self._ll)):
            bad = np.flatnonzero(~np.isfinite(self._ll)).tolist()
            problems.append(f"likelihood (studies {bad[:10]})")
        if self.hierarchical:
            if not np.all(np.isfinite(self._hier)):
                problems.append("hierarchical accuracy prior")
            if not math.isfinite(log_prior(self.state, self.priors, self.config.enforce_dv_gt_1)):
                problems.append("hyperpriors or mean constraints")
        if problems:
            raise RuntimeError(f"Non-finite posterior at initialization: {', '.join(problems)}")

    def _log_likelihoods(self, prev: np.ndarray, theta: np.ndarray) -> np.ndarray:
        acc = expit(theta)
        return self.dataset.study_log_likelihoods(
            prev,
            acc[:, TEST_REF, SE],
            acc[:, TEST_REF, SP],
            acc[:, TEST_INDEX, SE],
            acc[:, TEST_INDEX, SP],
        )

    def _hier_logpdf(self, theta: np.ndarray, sigma: np.ndarray, rho: np.ndarray, test: int, mu=None) -> np.ndarray:
        mu = self.state.mu if mu is None else mu
        return bivariate_normal_logpdf(
            theta[:, test, SE],
            theta[:, test, SP],
            mu[test, SE],
            mu[test, SP],
            sigma[test, SE],
            sigma[test, SP],
            rho[test],
        )

    def _accept(self, log_ratio) -> np.ndarray:
        u = self.rng.random(np.shape(log_ratio))
        with np.errstate(divide="ignore"):
            return np.log(u) < log_ratio

    def _record(self, block: str, accepted, index=None) -> None:
        accepted = np.asarray(accepted, dtype=float)
        if index is None:
            self._window_accepts[block] += accepted
        else:
            self._window_accepts[block][index] += accepted
        self._accepted[block] += float(accepted.sum())
        self._proposed[block] += int(accepted.size)

    def update_prev(self) -> None:
        state = self.state
        z = logit(state.prev)
        z_new = z + np.exp(self.log_scales["prev"]) * self.rng.standard_normal(z.shape)
        prev_new = expit(z_new)
        ll_new = self._log_likelihoods(prev_new, state.theta)
        # Flat prior on the probability scale; the random walk is on the logit.
        with np.errstate(divide="ignore", invalid="ignore"):
            jacobian = (np.log(prev_new) + np.log1p(-prev_new)) - (np.log(state.prev) + np.log1p(-state.prev))
            log_ratio = ll_new - self._ll + jacobian
        accepted = self._accept(log_ratio)
        state.prev = np.where(accepted, prev_new, state.prev)
        self._ll = np.where(accepted, ll_new, self._ll)
        self._record("prev", accepted)

    def update_accuracy(self) -> None:
        state = self.state
        scales = np.exp(self.log_scales["accuracy"])
        for test in (TEST_REF, TEST_INDEX):
            for measure in (SE, SP):
                proposal = state.theta.copy()
                proposal[:, test, measure] += scales[:, test, measure] * self.rng.standard_normal(state.n_studies)
                ll_new = self._log_likelihoods(state.prev, proposal)
                hier_new = self._hier_logpdf(proposal, state.sigma, state.rho, test)
                with np.errstate(invalid="ignore"):
                    log_ratio = (ll_new - self._ll) + (hier_new - self._hier[:, test])
                accepted = self._accept(log_ratio)
                state.theta[accepted, test, measure] = proposal[accepted, test, measure]
                self._ll = np.where(accepted, ll_new, self._ll)
                self._hier[:, test] = np.where(accepted, hier_new, self._hier[:, test])
                self._record("accuracy", accepted, (slice(None), test, measure))

    def _mean_lower_bound(self, measure: int, other: float) -> float:
        bound = -math.inf
        if self.config.enforce_dv_gt_1:
            bound = -other
        if measure == SP and self.priors.sp_mean_positive:
            bound = max(bound, 0.0)
        return bound

    def _mean_is_valid(self, mu_se: np.ndarray, mu_sp: np.ndarray) -> np.ndarray:
        valid = np.ones(np.shape(mu_se), dtype=bool)
        if self.config.enforce_dv_gt_1:
            valid &= mu_se + mu_sp > 0
        if self.priors.sp_mean_positive:
            valid &= mu_sp > 0
        return valid

    def update_mu(self) -> None:
        state = self.state
        n = state.n_studies
        for test in (TEST_REF, TEST_INDEX):
            s_se, s_sp = state.sigma[test]
            r = state.rho[test]
            cov = np.array([[s_se * s_se, r * s_se * s_sp], [r * s_se * s_sp, s_sp * s_sp]])
            precision = np.linalg.inv(cov)
            post_precision = n * precision + self.priors.mu_precision * np.eye(2)
            post_cov = np.linalg.inv(post_precision)
            post_mean = post_cov @ (precision @ state.theta[:, test, :].sum(axis=0))

            constrained = self.config.enforce_dv_gt_1 or self.priors.sp_mean_positive
            chol = np.linalg.cholesky(post_cov)
            if not constrained:
                state.mu[test] = post_mean + chol @ self.rng.standard_normal(2)
            else:
                draws = post_mean + self.rng.standard_normal((_MAX_REJECTION_TRIES, 2)) @ chol.T
                valid = np.flatnonzero(self._mean_is_valid(draws[:, SE], draws[:, SP]))
                if valid.size:
                    state.mu[test] = draws[valid[0]]
                else:
                    logger.debug("Mean draw of test %s fell back to truncated Gibbs", TEST_NAMES[test])
                    self._truncated_mean_gibbs(test, post_mean, post_precision)
            self._hier[:, test] = self._hier_logpdf(state.theta, state.sigma, state.rho, test)

    def _truncated_mean_gibbs(self, test: int, mean: np.ndarray, precision: np.ndarray) -> None:
        mu = self.state.mu[test]
        for measure, other in ((SE, SP), (SP, SE)):
            sd = 1.0 / math.sqrt(precision[measure, measure])
            loc = mean[measure] - precision[measure, other] / precision[measure, measure] * (mu[other] - mean[other])
            lower = self._mean_lower_bound(measure, mu[other])
            mu[measure] = truncnorm.rvs((lower - loc) / sd, np.inf, loc=loc, scale=sd, random_state=self.rng)

    def update_sigma(self) -> None:
        state = self.state
        upper = self.priors.sigma_upper
        uniform = self.priors.sigma_prior == "uniform"
        for test in (TEST_REF, TEST_INDEX):
            for measure in (SE, SP):
                current = state.sigma[test, measure]
                step = math.exp(self.log_scales["sigma"][test, measure]) * self.rng.standard_normal()
                if uniform:
                    frac = current / upper
                    new = upper * float(expit(logit(frac) + step))
                    new_frac = new / upper
                    if not 0.0 < new_frac < 1.0:
                        self._record("sigma", False, (test, measure))
                        continue
                    jacobian = (math.log(new_frac) + math.log1p(-new_frac)) - (math.log(frac) + math.log1p(-frac))
                else:
                    new = current * math.exp(step)
                    jacobian = step
                proposal = state.sigma.copy()
                proposal[test, measure] = new
                hier_new = self._hier_logpdf(state.theta, proposal, state.rho, test)
                log_ratio = (
                    float(hier_new.sum() - self._hier[:, test].sum())
                    + float(sigma_log_density(new, self.priors) - sigma_log_density(current, self.priors))
                    + jacobian
                )
                accepted = bool(self._accept(log_ratio))
                if accepted:
                    state.sigma[test, measure] = new
                    self._hier[:, test] = hier_new
                self._record("sigma", accepted, (test, measure))

    def update_rho(self) -> None:
        state = self.state
        for test in (TEST_REF, TEST_INDEX):
            current = state.rho[test]
            new = math.tanh(math.atanh(current) + math.exp(self.log_scales["rho"][test]) * self.rng.standard_normal())
            if abs(new) >= 1.0:
                self._record("rho", False, test)
                continue
            proposal = state.rho.copy()
            proposal[test] = new
            hier_new = self._hier_logpdf(state.theta, state.sigma, proposal, test)
            # Uniform prior on rho; the random walk is on atanh(rho).
            jacobian = math.log1p(-new * new) - math.log1p(-current * current)
            log_ratio = float(hier_new.sum() - self._hier[:, test].sum()) + jacobian
            accepted = bool(self._accept(log_ratio))
            if accepted:
                state.rho[test] = new
                self._hier[:, test] = hier_new
            self._record("rho", accepted, test)

    def sweep(self) -> None:
        """One full Metropolis-within-Gibbs iteration over the active blocks."""
        if "prev" in self.blocks:
            self.update_prev()
        if "accuracy" in self.blocks:
            self.update_accuracy()
        if "mu" in self.blocks:
            self.update_mu()
        if "sigma" in self.blocks:
            self.update_sigma()
        if "rho" in self.blocks:
            self.update_rho()

    def adapt(self) -> None:
        """Move every log proposal scale toward the target acceptance rate."""
        self._adapt_step += 1
        gain = self._adapt_step ** -0.6
        window = self.config.adapt_window
        for block, accepts in self._window_accepts.items():
            self.log_scales[block] += gain * (accepts / window - self.config.target_accept)
            accepts[...] = 0.0

    def reset_acceptance(self) -> None:
        self._accepted = {k: 0.0 for k in self._accepted}
        self._proposed = {k: 0 for k in self._proposed}

    def acceptance(self) -> Dict[str, float]:
        """Average acceptance per active Metropolis block since the last reset."""
        return {
            block: self._accepted[block] / self._proposed[block]
            for block in ("prev", "accuracy", "sigma", "rho")
            if block in self.blocks and self._proposed[block]
        }


def run_chain(
    dataset: StudyData,
    config: McmcConfig,
    chain_index: int,
    priors: Optional[HyperPriors] = None,
    initial: Optional[LcbmState] = None,
) -> ChainSamples:
    """
    Run one chain and keep its thinned post-burn-in draws.

    The chain's random stream is :func:`chain_stream(config.seed, chain_index)
    <chain_stream>`, so identical inputs give identical draws.

    Args:
        dataset: Study data (MetaDataset or PvbMetaDataset)
        config: Sampler settings
        chain_index: Index of the chain
        priors: Hyperprior settings; the bivariate latent class presets when None
        initial: Starting state; jittered naive estimates when None

    Returns:
        ChainSamples with ``config.n_kept`` draws

    Raises:
        RuntimeError: If the posterior is not finite at the starting state
    """
    priors = priors or HyperPriors.lcbm()
    rng = chain_stream(config.seed, chain_index)
    chain = MetropolisWithinGibbs(dataset, config, priors, rng, state=initial)

    n = dataset.n_studies
    n_kept = config.n_kept
    prev = np.empty((n_kept, n))
    accuracy = np.empty((n_kept, n, 2, 2))
    mu = np.empty((n_kept, 2, 2))
    sigma = np.empty((n_kept, 2, 2))
    rho = np.empty((n_kept, 2))

    logger.info(
        "Chain %d: %d iterations, %d burn-in, thin %d, blocks %s",
        chain_index,
        config.n_iters,
        config.n_burnin,
        config.thin,
        sorted(chain.blocks),
    )
    kept = 0
    for t in range(config.n_iters):
        chain.sweep()
        if t < config.n_burnin:
            if (t + 1) % config.adapt_window == 0:
                chain.adapt()
            if t + 1 == config.n_burnin:
                chain.reset_acceptance()
                logger.debug("Chain %d: adaptation frozen after %d iterations", chain_index, t + 1)
            continue
        if (t - config.n_burnin) % config.thin == 0:
            state = chain.state
            prev[kept] = state.prev
            accuracy[kept] = state.accuracy
            mu[kept] = state.mu
            sigma[kept] = state.sigma
            rho[kept] = state.rho
            kept += 1

    acceptance = chain.acceptance()
    logger.info(
        "Chain %d done; acceptance %s",
        chain_index,
        ", ".join(f"{k}={v:.2f}" for k, v in acceptance.items()),
    )
    return ChainSamples(
        chain_index=chain_index,
        prev=prev,
        accuracy=accuracy,
        mu=mu,
        sigma=sigma,
        rho=rho,
        acceptance=acceptance,
    )
