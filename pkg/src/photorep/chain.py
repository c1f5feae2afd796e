"""Monte Carlo copying of an N-base gene, one photon per base.

Each base is copied independently.  A gene base ``A`` (state ``a``) shifts its
environment partner by ``J(r)`` and the photon either replicates it (partner
ends in ``a``) or fails (partner stays in ``b``).  A gene base ``B`` leaves the
partner unshifted: the photon usually passes (dormant) and occasionally
mutates it.  Failed copies are not retried.

Random streams are counter based: trial ``k`` uses a Philox generator whose
key comes from the master seed and whose counter starts at block ``k``, so
results do not depend on how trials are split across threads.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .analytic import transition_probability
from .exceptions import DomainError
from .params import DistanceProfile, GeneString, ModelParams, coupling_from_distance, detunings

REPLICATED, FAILED, DORMANT, MUTATED = "Replicated", "Failed", "Dormant", "Mutated"
OUTCOMES = (REPLICATED, FAILED, DORMANT, MUTATED)
ACCOUNTING = ("expected", "event")


def base_probabilities(base, r, delta_pulse, params: ModelParams, J0=10.0, r0=1.0) -> dict:
    """Outcome distribution for one base at distance ``r`` (``r = inf`` switches the coupling off).

    The distance only matters for an ``A`` base, whose partner sees
    ``J(r) = J0 (r0 / r)^3``; ``params.coupling_J`` is ignored here.
    """
    base = str(base).upper()
    if base == "A":
        J = coupling_from_distance(r, J0, r0)
        p = transition_probability(delta_pulse, detunings(params).delta_Lb - J, params.gamma)
        return {REPLICATED: p, FAILED: 1.0 - p}
    if base == "B":
        p = transition_probability(delta_pulse, detunings(params).delta_Lb, params.gamma)
        return {DORMANT: 1.0 - p, MUTATED: p}
    raise DomainError(f"base must be 'A' or 'B', got {base!r}")


@dataclass(frozen=True)
class DisorderSpec:
    """Distribution of the pulse linewidth ``Delta`` seen by each base.

    ``fixed`` uses ``delta``; ``log_uniform`` draws from ``[low, high]``
    uniformly in ``log Delta``; ``gamma`` draws from a gamma distribution
    with ``shape`` and mean ``delta``.
    """

    family: str = "fixed"
    delta: float = 0.1
    low: float | None = None
    high: float | None = None
    shape: float | None = None

    def __post_init__(self):
        if self.family not in ("fixed", "log_uniform", "gamma"):
            raise DomainError(f"unknown disorder family {self.family!r}")
        if self.family == "fixed" and not self.delta > 0:
            raise DomainError(f"pulse linewidth must be > 0, got {self.delta}")
        if self.family == "log_uniform":
            if self.low is None or self.high is None or not 0 < self.low <= self.high:
                raise DomainError("log_uniform disorder needs 0 < low <= high")
        if self.family == "gamma":
            if self.shape is None or not self.shape > 0 or not self.delta > 0:
                raise DomainError("gamma disorder needs shape > 0 and mean delta > 0")

    def sample(self, rng: np.random.Generator, n):
        if self.family == "fixed":
            return np.full(n, float(self.delta))
        if self.family == "log_uniform":
            return np.exp(rng.uniform(math.log(self.low), math.log(self.high), n))
        out = rng.gamma(self.shape, self.delta / self.shape, n)
        # a zero draw is possible in floating point and would mean a monochromatic photon
        return np.maximum(out, np.finfo(float).tiny)

    def to_dict(self):
        d = {"family": self.family, "delta": self.delta}
        for k in ("low", "high", "shape"):
            if getattr(self, k) is not None:
                d[k] = getattr(self, k)
        return d


@dataclass(frozen=True)
class OutcomeRecord:
    """One copy of the gene: outcome, resulting base and logged work for every position."""

    outcomes: tuple
    copy: GeneString
    work: np.ndarray
    linewidths: np.ndarray

    @property
    def fidelity(self):
        return hamming_fidelity(self.copy, GeneString(_template(self.outcomes)))

    def counts(self):
        return {k: sum(o == k for o in self.outcomes) for k in OUTCOMES}


def _template(outcomes):
    return "".join("A" if o in (REPLICATED, FAILED) else "B" for o in outcomes)


def hamming_fidelity(copy, gene):
    """Fraction of positions where ``copy`` equals ``gene``."""
    a, b = str(copy), str(gene)
    if len(a) != len(b):
        raise DomainError("strings must have equal length")
    return 1.0 - sum(x != y for x, y in zip(a, b)) / len(a)


def trial_generator(master_seed, trial):
    """Independent Philox stream for one trial, derived from ``(master_seed, trial)``."""
    key = np.random.SeedSequence(int(master_seed)).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, int(trial), 0]))


class _Sampler:
    """Precomputed per-base quantities shared by all trials."""

    def __init__(self, gene, profile, disorder, params, accounting):
        if len(gene) != len(profile):
            raise DomainError(f"gene has {len(gene)} bases but the distance profile has {len(profile)}")
        if accounting not in ACCOUNTING:
            raise DomainError(f"accounting must be one of {ACCOUNTING}, got {accounting!r}")
        self.gene = gene
        self.is_a = gene.as_mask()
        d = detunings(params)
        self.detuning = np.where(self.is_a, d.delta_Lb - profile.couplings(), d.delta_Lb)
        self.disorder = disorder
        self.params = params
        self.accounting = accounting
        self.fixed_p = None
        if disorder.family == "fixed":
            self.fixed_p = np.atleast_1d(transition_probability(disorder.delta, self.detuning, params.gamma))

    def draw(self, rng):
        """Return ``(absorbed, linewidths, work)`` for one trial."""
        n = self.is_a.size
        widths = self.disorder.sample(rng, n)
        if self.fixed_p is not None:
            p = self.fixed_p
        else:
            p = np.atleast_1d(transition_probability(widths, self.detuning, self.params.gamma))
        absorbed = rng.random(n) < p
        scale = 2.0 * self.params.omega_L
        work = scale * p if self.accounting == "expected" else scale * absorbed
        return absorbed, widths, work


def _record(gene_mask, absorbed, widths, work):
    outcomes = tuple(
        (REPLICATED if hit else FAILED) if is_a else (MUTATED if hit else DORMANT)
        for is_a, hit in zip(gene_mask, absorbed)
    )
    copy = "".join("A" if hit else "B" for hit in absorbed)
    return OutcomeRecord(outcomes=outcomes, copy=GeneString(copy), work=np.asarray(work, float), linewidths=widths)


def replicate_gene(
    gene: GeneString,
    profile: DistanceProfile,
    disorder: DisorderSpec,
    params: ModelParams,
    seed,
    accounting="expected",
) -> OutcomeRecord:
    """Copy ``gene`` once.  The copy base is ``A`` exactly when the photon was absorbed.

    Work per base is ``2 omega_L p`` (``accounting="expected"``) or
    ``2 omega_L`` per absorption event (``"event"``).
    """
    gene = gene if isinstance(gene, GeneString) else GeneString(gene)
    sampler = _Sampler(gene, profile, disorder, params, accounting)
    absorbed, widths, work = sampler.draw(trial_generator(seed, 0))
    return _record(sampler.is_a, absorbed, widths, work)


def wilson_interval(successes, trials, level=0.95):
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class EnsembleStats:
    trials: int
    n_bases: int
    fidelity_mean: float
    fidelity_ci: tuple
    exact_copy_rate: float
    exact_copy_ci: tuple
    mutation_histogram: list
    error_histogram: list
    outcome_counts: dict
    outcome_rates: dict
    outcome_ci: dict
    per_base_absorbed: list
    mean_total_work: float
    work_ci: tuple
    mean_work_per_a_base: float | None
    accounting: str
    level: float = 0.95
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = dict(self.__dict__)
        out.pop("extra")
        out.update(self.extra)
        for k in ("fidelity_ci", "exact_copy_ci", "work_ci"):
            out[k] = list(out[k])
        out["outcome_ci"] = {k: list(v) for k, v in self.outcome_ci.items()}
        return out


def _mean_ci(values, level):
    values = np.asarray(values, float)
    n = values.size
    mean = float(values.mean())
    if n < 2:
        return mean, (mean, mean)
    sem = float(values.std(ddof=1)) / math.sqrt(n)
    half = float(stats.t.ppf(0.5 + level / 2, n - 1)) * sem
    return mean, (mean - half, mean + half)


def _run_chunk(sampler, master_seed, start, stop):
    n = sampler.is_a.size
    absorbed = np.empty((stop - start, n), dtype=bool)
    work = np.empty(stop - start)
    work_a = np.empty(stop - start)
    widths_mean = np.empty(stop - start)
    for i, trial in enumerate(range(start, stop)):
        hit, widths, w = sampler.draw(trial_generator(master_seed, trial))
        absorbed[i] = hit
        work[i] = w.sum()
        work_a[i] = w[sampler.is_a].sum()
        widths_mean[i] = widths.mean()
    return absorbed, work, work_a, widths_mean


def ensemble_stats(
    gene: GeneString,
    profile: DistanceProfile,
    disorder: DisorderSpec,
    params: ModelParams,
    trials,
    master_seed,
    threads=1,
    accounting="expected",
    level=0.95,
    trial_log=None,
    log_header=None,
    chunk=4096,
) -> EnsembleStats:
    """Statistics of ``trials`` independent copies of ``gene``.

    Trial ``k`` always uses the stream ``(master_seed, k)``, and chunks are
    reassembled in trial order, so ``threads`` never changes the result.
    ``trial_log`` is an optional path for a per-trial CSV, preceded by the
    ``log_header`` comment line when given.
    """
    trials = int(trials)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    gene = gene if isinstance(gene, GeneString) else GeneString(gene)
    sampler = _Sampler(gene, profile, disorder, params, accounting)
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    if threads and threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            parts = list(pool.map(lambda b: _run_chunk(sampler, master_seed, *b), bounds))
    else:
        parts = [_run_chunk(sampler, master_seed, *b) for b in bounds]
    absorbed = np.concatenate([p[0] for p in parts])
    work = np.concatenate([p[1] for p in parts])
    work_a = np.concatenate([p[2] for p in parts])
    widths_mean = np.concatenate([p[3] for p in parts])

    is_a = sampler.is_a
    n = is_a.size
    # copy base is A exactly when absorbed, so an error is a failed A or a mutated B
    errors = np.where(is_a, ~absorbed, absorbed)
    n_err = errors.sum(axis=1)
    n_mut = (absorbed & ~is_a).sum(axis=1)
    fidelity = 1.0 - n_err / n
    fid_mean, fid_ci = _mean_ci(fidelity, level)
    exact = int(np.count_nonzero(n_err == 0))

    n_a, n_b = int(is_a.sum()), int((~is_a).sum())
    counts = {
        REPLICATED: int((absorbed & is_a).sum()),
        FAILED: int((~absorbed & is_a).sum()),
        DORMANT: int((~absorbed & ~is_a).sum()),
        MUTATED: int((absorbed & ~is_a).sum()),
    }
    totals = {REPLICATED: n_a, FAILED: n_a, DORMANT: n_b, MUTATED: n_b}
    rates, cis = {}, {}
    for k in OUTCOMES:
        tot = totals[k] * trials
        if tot:
            rates[k] = counts[k] / tot
            cis[k] = wilson_interval(counts[k], tot, level)
    work_mean, work_ci = _mean_ci(work, level)
    mean_a = float(work_a.mean()) / n_a if n_a else None

    if trial_log is not None:
        write_trial_log(trial_log, absorbed, is_a, fidelity, work, widths_mean, log_header)

    return EnsembleStats(
        trials=trials,
        n_bases=n,
        fidelity_mean=fid_mean,
        fidelity_ci=fid_ci,
        exact_copy_rate=exact / trials,
        exact_copy_ci=wilson_interval(exact, trials, level),
        mutation_histogram=np.bincount(n_mut, minlength=n + 1).tolist(),
        error_histogram=np.bincount(n_err, minlength=n + 1).tolist(),
        outcome_counts=counts,
        outcome_rates=rates,
        outcome_ci=cis,
        per_base_absorbed=absorbed.sum(axis=0).astype(int).tolist(),
        mean_total_work=work_mean,
        work_ci=work_ci,
        mean_work_per_a_base=mean_a,
        accounting=accounting,
        level=level,
    )


def expected_success(gene: GeneString, profile: DistanceProfile, params: ModelParams, delta_pulse):
    """Per-base probability that the copy base matches the gene base."""
    gene = gene if isinstance(gene, GeneString) else GeneString(gene)
    is_a = gene.as_mask()
    d = detunings(params)
    det = np.where(is_a, d.delta_Lb - profile.couplings(), d.delta_Lb)
    p = np.atleast_1d(transition_probability(delta_pulse, det, params.gamma))
    return np.where(is_a, p, 1.0 - p)


def write_trial_log(path, absorbed, is_a, fidelity, work, widths_mean, header=None):
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "copy", "replicated", "failed", "dormant", "mutated", "fidelity", "work", "mean_linewidth"])
        for k in range(absorbed.shape[0]):
            hit = absorbed[k]
            w.writerow(
                [
                    k,
                    "".join("A" if h else "B" for h in hit),
                    int((hit & is_a).sum()),
                    int((~hit & is_a).sum()),
                    int((~hit & ~is_a).sum()),
                    int((hit & ~is_a).sum()),
                    f"{fidelity[k]:.16e}",
                    f"{work[k]:.16e}",
                    f"{widths_mean[k]:.16e}",
                ]
            )
