"""Information-theoretic and complexity analytics.

Achievable rates for bit-metric decoding over the AWGN channel are computed
with Gauss-Hermite quadrature (128 nodes per constellation point, absolute
accuracy well below 1e-4 bit); SNR inversions use bisection to 0.001 dB.
The finite-blocklength figure of merit is AIR_n = R_BMD - R_loss, where the
rate loss H(A) - k/n of each shaper comes from its exact codebook analysis.

The sweep helpers mirror the comparison methodology used throughout the
analytics: distribution matchers quantize a fixed target pmf per
blocklength, and the sphere shapers are sized to the MPDM input length so
that all schemes run at identical (k, n).  When a transmission chain pins
k/n above what a DM reaches at the quantized target, the target entropy is
raised until 2^k sequences are addressable.

Everything here is pure; sweeps are deterministic with a fixed output
ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp

from . import ccdm as _ccdm
from . import mpdm as _mpdm
from . import spsh as _spsh
from .core import AmplitudeAlphabet, Composition, avg_energy, entropy, mb_from_entropy, multinomial
from .errors import ConfigError, UnachievableRate
from .labeling import BrgcLabeling

__all__ = [
    "symbol_pmf",
    "rbmd",
    "mutual_information",
    "rate_loss",
    "delta_snr",
    "required_snr",
    "air_n",
    "PasRates",
    "SchemeState",
    "scheme_state",
    "state_for_rate",
    "rate_loss_sweep",
    "air_sweep",
    "g2c_sweep",
    "optimal_mb_operating_point",
    "CostReport",
    "cost_report",
]

GH_NODES = 128
_gh_x, _gh_w = hermgauss(GH_NODES)
_SNR_LO, _SNR_HI = -20.0, 60.0  # dB bracket for rate inversions


def symbol_pmf(amp_pmf) -> np.ndarray:
    """Symmetric 2^m-ASK pmf from an amplitude pmf (uniform signs).

    Aligned to :attr:`BrgcLabeling.points`, i.e. negative points first with
    ascending amplitude index in each half.
    """
    pa = np.asarray(amp_pmf, dtype=float)
    return np.concatenate([pa, pa]) / 2.0


def _bit_cond_entropies(p_x: np.ndarray, snr_db: float, labeling: BrgcLabeling) -> np.ndarray:
    """H(B_j | Y) for every bit level, by Gauss-Hermite quadrature."""
    pts = labeling.points
    m = labeling.m
    es = float(np.sum(p_x * pts**2))
    sigma2 = es / 10 ** (snr_db / 10)
    # y = x + sqrt(2) sigma t puts the channel average on Hermite nodes
    y = pts[:, None] + math.sqrt(2.0 * sigma2) * _gh_x[None, :]
    active = p_x > 0
    logp = np.full(len(pts), -np.inf)
    logp[active] = np.log(p_x[active])
    ll = -((y[:, :, None] - pts[None, None, :]) ** 2) / (2.0 * sigma2) + logp[None, None, :]
    denom = logsumexp(ll, axis=2)
    weights = p_x[:, None] * (_gh_w[None, :] / math.sqrt(math.pi))
    out = np.zeros(m)
    bitsets = labeling.bitsets()
    for j in range(m):
        h = np.zeros_like(denom)
        for u in (0, 1):
            num = logsumexp(ll[:, :, bitsets[j, u]], axis=2)
            log_post = num - denom
            post = np.exp(log_post)
            h -= np.where(post > 0, post * log_post / math.log(2), 0.0)
        out[j] = float(np.sum(weights * h))
    return out


def rbmd(p_x, snr_db: float, labeling: BrgcLabeling) -> float:
    """Bit-metric decoding rate [H(X) - sum_j H(B_j|Y)]+ in bit/1-D."""
    p_x = np.asarray(p_x, dtype=float)
    hx = entropy(p_x)
    return max(hx - float(np.sum(_bit_cond_entropies(p_x, snr_db, labeling))), 0.0)


def mutual_information(p_x, snr_db: float, labeling: BrgcLabeling) -> float:
    """Symbol-wise mutual information I(X;Y) in bit/1-D."""
    p_x = np.asarray(p_x, dtype=float)
    pts = labeling.points
    es = float(np.sum(p_x * pts**2))
    sigma2 = es / 10 ** (snr_db / 10)
    y = pts[:, None] + math.sqrt(2.0 * sigma2) * _gh_x[None, :]
    active = p_x > 0
    logp = np.full(len(pts), -np.inf)
    logp[active] = np.log(p_x[active])
    ll = -((y[:, :, None] - pts[None, None, :]) ** 2) / (2.0 * sigma2) + logp[None, None, :]
    denom = logsumexp(ll, axis=2)
    # H(X|Y) via the posterior of the transmitted point
    log_post_tx = np.stack([ll[i, :, i] for i in range(len(pts))]) - denom
    hxy = float(np.sum(p_x[:, None] * (_gh_w[None, :] / math.sqrt(math.pi)) * (-log_post_tx / math.log(2))))
    return max(entropy(p_x) - hxy, 0.0)


def rate_loss(p, k: int, n: int) -> float:
    """Finite-length shaping penalty H(p) - k/n in bit/1-D."""
    return entropy(p) - k / n


def required_snr(p_x, rate: float, labeling: BrgcLabeling, tol_db: float = 1e-3) -> float:
    """Smallest SNR (dB) at which the BMD rate reaches ``rate``; bisection."""
    if rate >= entropy(np.asarray(p_x, dtype=float)) - 1e-12:
        raise UnachievableRate(f"rate {rate} >= H(X); BMD rate saturates below it")
    lo, hi = _SNR_LO, _SNR_HI
    if rbmd(p_x, hi, labeling) < rate:
        raise UnachievableRate(f"rate {rate} not reached at {hi} dB")
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if rbmd(p_x, mid, labeling) >= rate:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def delta_snr(p_x, rate: float, labeling: BrgcLabeling | None = None) -> float:
    """Gap to capacity in dB: required SNR over the Shannon SNR 2^{2R} - 1."""
    if labeling is None:
        labeling = BrgcLabeling(int(round(math.log2(len(p_x)))))
    snr = required_snr(p_x, rate, labeling)
    return snr - 10.0 * math.log10(2 ** (2 * rate) - 1.0)


def air_n(p, k: int, n: int, snr_db: float, labeling: BrgcLabeling | None = None) -> float:
    """Finite-blocklength AIR: R_BMD minus the shaper rate loss."""
    p = np.asarray(p, dtype=float)
    if labeling is None:
        labeling = BrgcLabeling(int(round(math.log2(len(p)))) + 1)
    return rbmd(symbol_pmf(p), snr_db, labeling) - rate_loss(p, k, n)


# ---------------------------------------------------------------------------
# PAS rate bookkeeping

@dataclass(frozen=True)
class PasRates:
    """Bit budget of one PAS n-sequence at operational shaper rate k/n.

    gamma = R_c m - (m-1) extra data bits ride on signs; shaping and coding
    redundancies account for the remaining n m - n R bits.
    """

    m: int
    n: int
    k: int
    code_rate: Fraction

    def __post_init__(self):
        gamma = self.code_rate * self.m - (self.m - 1)
        if gamma < 0 or gamma > 1:
            raise ConfigError(f"code rate {self.code_rate} incompatible with m={self.m}")
        if (gamma * self.n).denominator != 1:
            raise ConfigError(f"gamma n = {gamma * self.n} is not an integer")
        if self.k > self.n * (self.m - 1):
            raise ConfigError("shaper bits exceed amplitude bits")

    @property
    def gamma(self) -> Fraction:
        return self.code_rate * self.m - (self.m - 1)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n) + self.gamma

    @property
    def data_amplitude_bits(self) -> int:
        return self.k

    @property
    def data_sign_bits(self) -> int:
        return int(self.gamma * self.n)

    @property
    def shaping_redundancy_bits(self) -> int:
        return self.n * (self.m - 1) - self.k

    @property
    def coding_redundancy_bits(self) -> int:
        return self.n - int(self.gamma * self.n)

    @property
    def total_redundancy_bits(self) -> int:
        return self.shaping_redundancy_bits + self.coding_redundancy_bits

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "code_rate": str(self.code_rate),
            "gamma": float(self.gamma),
            "rate": float(self.rate),
            "data_amplitude_bits": self.data_amplitude_bits,
            "data_sign_bits": self.data_sign_bits,
            "shaping_redundancy_bits": self.shaping_redundancy_bits,
            "coding_redundancy_bits": self.coding_redundancy_bits,
            "total_redundancy_bits": self.total_redundancy_bits,
        }


# ---------------------------------------------------------------------------
# per-scheme operating points

@dataclass(frozen=True)
class SchemeState:
    """One shaper sized at (n, k): its induced pmf and rate loss."""

    scheme: str
    n: int
    k: int
    pmf: np.ndarray
    avg_energy: float
    extra: dict

    @property
    def entropy(self) -> float:
        return entropy(self.pmf)

    @property
    def rate_loss(self) -> float:
        return self.entropy - self.k / self.n


def scheme_state(scheme: str, alph: AmplitudeAlphabet, n: int, target_pmf=None,
                 k: int | None = None, e_max_hint: int | None = None) -> SchemeState:
    """Size one scheme at blocklength n.

    DM schemes quantize ``target_pmf``; their own input length applies unless
    ``k`` forces fewer bits.  Sphere schemes need ``k`` and use the smallest
    sphere with 2^k sequences.
    """
    scheme = scheme.lower()
    if scheme == "uniform":
        p = np.full(alph.n_a, 1.0 / alph.n_a)
        kk = n * (alph.m - 1) if k is None else k
        return SchemeState("uniform", n, kk, p, avg_energy(p, alph), {})
    if scheme in ("ccdm", "mpdm"):
        if target_pmf is None:
            raise ConfigError(f"{scheme} needs a target pmf")
        comp = _ccdm.CcdmCodebook(alph, _quantize(target_pmf, n)).composition
        if scheme == "ccdm":
            kmax = multinomial(comp).bit_length() - 1
            kk = kmax if k is None else k
            if kk > kmax:
                raise ConfigError(f"ccdm supports at most k={kmax} for this target")
            p = comp.pmf()
            return SchemeState("ccdm", n, kk, p, avg_energy(p, alph),
                               {"composition": comp, "sequence_energy": comp.energy(alph)})
        kmax = _mpdm.mpdm_input_length(comp)
        kk = kmax if k is None else k
        if kk > kmax:
            raise ConfigError(f"mpdm supports at most k={kmax} for this target")
        p = comp.pmf()
        return SchemeState("mpdm", n, kk, p, avg_energy(p, alph), {"composition": comp})
    if scheme in ("ess", "sm"):
        if k is None:
            raise ConfigError(f"{scheme} needs a target input length k")
        e_max = _spsh.min_radius(n, alph, k, e_max_hint)
        if scheme == "ess":
            structure = _spsh.build_ess_trellis(n, alph, e_max, "fp").with_k(k)
        else:
            structure = _spsh.build_sm_tables(n, alph, e_max, "fp").with_k(k)
        p, e = _spsh.induced_pmf(structure, k)
        return SchemeState(scheme, n, k, p, e, {"e_max": e_max, "structure": structure})
    raise ConfigError(f"unknown scheme {scheme!r}")


def _quantize(p, n):
    from .core import quantize_pmf

    return quantize_pmf(p, n)


def state_for_rate(scheme: str, alph: AmplitudeAlphabet, n: int, k: int,
                   e_max_hint: int | None = None) -> SchemeState:
    """Size a scheme to address exactly 2^k sequences.

    For the distribution matchers the target entropy is raised (equivalent
    to optimizing the Maxwell-Boltzmann target for a higher SNR) until the
    quantized target supports k input bits.
    """
    scheme = scheme.lower()
    if scheme in ("uniform", "ess", "sm"):
        return scheme_state(scheme, alph, n, k=k, e_max_hint=e_max_hint)

    def reaches(h):
        comp = _quantize(mb_from_entropy(alph, h).pmf, n)
        if scheme == "ccdm":
            return multinomial(comp).bit_length() - 1 >= k
        return _mpdm.mpdm_input_length(comp) >= k

    lo, hi = k / n, math.log2(alph.n_a)
    if lo >= hi or not reaches(hi):
        raise ConfigError(f"{scheme} cannot address 2^{k} sequences at n={n}")
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    while not reaches(hi):  # guard against quantization jitter at the boundary
        hi += 1e-6
    return scheme_state(scheme, alph, n, target_pmf=mb_from_entropy(alph, hi).pmf, k=k)


# ---------------------------------------------------------------------------
# sweeps

def rate_loss_sweep(target_pmf, n_values, alph: AmplitudeAlphabet,
                    schemes=("ccdm", "mpdm", "ess", "sm")) -> list[dict]:
    """Rate loss vs blocklength rows, one per (scheme, n).

    DM path: quantize the target pmf at each n.  Sphere path: size the
    sphere to the MPDM input length at the same n, so all schemes compare at
    identical (k, n).
    """
    rows = []
    hint = None
    for n in n_values:
        comp = _quantize(target_pmf, n)
        k_mpdm = _mpdm.mpdm_input_length(comp)
        states = []
        for scheme in schemes:
            if scheme in ("ccdm", "mpdm"):
                states.append(scheme_state(scheme, alph, n, target_pmf=target_pmf))
            else:
                states.append(scheme_state(scheme, alph, n, k=k_mpdm, e_max_hint=hint))
        for st in states:
            if st.scheme in ("ess", "sm"):
                hint = st.extra["e_max"]
            rows.append({
                "scheme": st.scheme, "n": n, "k": st.k, "H": st.entropy,
                "E": st.avg_energy, "rloss": st.rate_loss,
            })
    return rows


def air_sweep(states, snr_values, labeling: BrgcLabeling) -> list[dict]:
    """AIR_n vs SNR rows for pre-sized scheme states (plus uniform baselines)."""
    rows = []
    for st in states:
        rl = 0.0 if st.scheme == "uniform" else st.rate_loss
        p_x = symbol_pmf(st.pmf)
        for snr in snr_values:
            rows.append({
                "scheme": st.scheme, "snr_db": float(snr),
                "air": rbmd(p_x, float(snr), labeling) - rl,
            })
    return rows


def g2c_sweep(m: int, rate: float, hx_values) -> list[dict]:
    """Gap-to-capacity rows over a grid of constellation entropies H(X)."""
    labeling = BrgcLabeling(m)
    alph = AmplitudeAlphabet(m)
    rows = []
    for hx in hx_values:
        pa = mb_from_entropy(alph, float(hx) - 1.0).pmf
        rc = (m + rate - float(hx)) / m
        try:
            d = delta_snr(symbol_pmf(pa), rate, labeling)
        except UnachievableRate:
            d = math.inf
        rows.append({"Hx": float(hx), "Rc": rc, "delta_snr_db": d})
    return rows


def optimal_mb_operating_point(m: int, rate: float) -> dict:
    """Golden-section minimum of the gap-to-capacity over the MB family."""
    labeling = BrgcLabeling(m)
    alph = AmplitudeAlphabet(m)

    def f(hx):
        pa = mb_from_entropy(alph, hx - 1.0).pmf
        return delta_snr(symbol_pmf(pa), rate, labeling)

    lo, hi = rate + 0.05, float(m) - 1e-6
    invphi = (math.sqrt(5) - 1) / 2
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > 1e-4:
        if f1 > f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
    hx = 0.5 * (lo + hi)
    uniform = delta_snr(symbol_pmf(np.full(alph.n_a, 1.0 / alph.n_a)), rate, labeling)
    return {
        "Hx": hx,
        "Rc": (m + rate - hx) / m,
        "delta_snr_db": f(hx),
        "uniform_delta_snr_db": uniform,
        "shaping_gain_db": uniform - f(hx),
    }


# ---------------------------------------------------------------------------
# complexity accounting

@dataclass(frozen=True)
class CostReport:
    scheme: str
    n: int
    serialism: int
    storage_bits: int
    ops_per_symbol: dict

    @property
    def storage_kb(self) -> float:
        """Decimal kilobytes, two decimals (bits / 8000)."""
        return round(self.storage_bits / 8000.0, 2)

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme, "n": self.n, "serialism": self.serialism,
            "storage_bits": self.storage_bits, "storage_kB": self.storage_kb,
            "ops_per_symbol": self.ops_per_symbol,
        }


def cost_report(scheme: str, n: int, alph: AmplitudeAlphabet, precision: str = "fp",
                e_max: int | None = None, composition: Composition | None = None) -> CostReport:
    """Instantiate the storage/serialism/computation bounds for one scheme.

    Sphere schemes need ``e_max`` (the trellis is built once to get the exact
    shell count and shaping rate); the sr variant needs a composition for its
    serialism formula.  Reported numbers are analytical upper bounds for the
    algorithms, not measurements of this implementation.
    """
    scheme = scheme.lower()
    if scheme in ("ess", "sm"):
        if e_max is None:
            raise ConfigError(f"{scheme} cost report needs e_max")
        full = _spsh.build_ess_trellis(n, alph, e_max, "fp")
        L = full.L
        k = full.size.bit_length() - 1
        size = full.size
        nrs_bits = size.bit_length() - 1 if size & (size - 1) == 0 else size.bit_length()
        if precision == "fp":
            width = nrs_bits
        else:
            n_m, n_p = _spsh._split_precision(precision)
            width = n_m + n_p
        if scheme == "ess":
            return CostReport("ess", n, k + n, L * n * width,
                              {"bit_ops": alph.n_a * width,
                               "additions": alph.n_a, "comparisons": alph.n_a})
        log2n = math.ceil(math.log2(n))
        return CostReport("sm", n, k + log2n, L * log2n * width,
                          {"bit_ops": L * width * width,
                           "multiplications": L, "comparisons": L})
    if scheme == "ccdm":
        # arithmetic-coding realization: interval plus composition state
        if composition is None:
            raise ConfigError("ccdm cost report needs the composition (for k)")
        k = multinomial(composition).bit_length() - 1
        storage = alph.n_a * math.ceil(math.log2(n + 1))
        return CostReport("ccdm", n, k + n, storage,
                          {"multiplications": alph.n_a, "divisions": alph.n_a, "comparisons": alph.n_a})
    if scheme == "sr":
        if composition is None or len(composition.counts) != 2:
            raise ConfigError("sr cost report needs a binary composition")
        n1 = min(composition.counts)
        storage = 2 * math.ceil(math.log2(n + 1))
        return CostReport("sr", n, n1 + 1, storage,
                          {"binomial_coefficients_shaping": alph.n_a - 1,
                           "binomial_coefficients_deshaping": (alph.n_a - 1) / 2})
    raise ConfigError(f"unknown scheme {scheme!r}")
