"""End-to-end probabilistic amplitude shaping chain over AWGN.

Transmit: the first k information bits feed the amplitude shaper; the
resulting amplitudes become m-1 Gray bits each, which (together with gamma*n
extra information bits) are systematically FEC encoded.  The n bits that the
codeword adds beyond its input - preceded by the extra bits - select the
signs, so x = s * a symbol by symbol.  With gamma = 0 this reduces to the
plain reverse-concatenation chain; the "uniform" scheme bypasses shaping and
maps coded bits straight onto constellation points.

Receive: a prior-weighted soft demapper produces per-bit-level LLRs, the
LDPC decoder runs belief propagation, amplitude bits map back to amplitudes
and the deshaper inverts the shaper.  A decoded amplitude sequence outside
the shaper codebook raises DeshapeFailure, which the frame-error-rate
driver counts as a frame error.

Monte-Carlo driver: frames are generated from counter-based RNG streams
keyed by (seed, SNR index, frame index), simulated in fixed-size rounds of
batch_frames * workers frames, and aggregated by summation - so a run is
bit-for-bit reproducible for a given (seed, workers) regardless of worker
scheduling.  Shapers, trellises and code structures are shared read-only.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import ccdm as _ccdm
from . import ldpc as _ldpc
from . import metrics as _metrics
from . import mpdm as _mpdm
from . import spsh as _spsh
from .core import AmplitudeAlphabet, BitWord, Composition
from .errors import ConfigError, DeshapeFailure, ShapingError
from .labeling import BrgcLabeling

__all__ = [
    "PasConfig",
    "PasChain",
    "build_chain",
    "llr",
    "llr_matrix",
    "pas_transmit",
    "pas_receive",
    "simulate_fer",
]


# ---------------------------------------------------------------------------
# soft demapper

def llr_matrix(y: np.ndarray, snr_db: float, p_x: np.ndarray, labeling: BrgcLabeling) -> np.ndarray:
    """Prior-weighted bit LLRs, shape y.shape + (m,); positive favors bit 0."""
    pts = labeling.points
    es = float(np.sum(p_x * pts**2))
    sigma2 = es / 10 ** (snr_db / 10)
    y = np.asarray(y, dtype=np.float64)
    active = p_x > 0
    logp = np.full(len(pts), -np.inf)
    logp[active] = np.log(p_x[active])
    ll = -((y[..., None] - pts) ** 2) / (2.0 * sigma2) + logp
    out = np.empty(y.shape + (labeling.m,))
    bitsets = labeling.bitsets()
    for j in range(labeling.m):
        num = _logsumexp_last(ll[..., bitsets[j, 0]])
        den = _logsumexp_last(ll[..., bitsets[j, 1]])
        out[..., j] = num - den
    return out


def _logsumexp_last(a):
    mx = a.max(axis=-1, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    return np.squeeze(mx, -1) + np.log(np.exp(a - mx).sum(axis=-1))


def llr(y: float, snr_db: float, p_x, labeling: BrgcLabeling, j: int) -> float:
    """Scalar demapper for bit level j (0 = sign bit)."""
    if not 0 <= j < labeling.m:
        raise ConfigError(f"bit level {j} outside [0, {labeling.m})")
    return float(llr_matrix(np.array([y]), snr_db, np.asarray(p_x, float), labeling)[0, j])


# ---------------------------------------------------------------------------
# shaper adapters (one uniform surface over the four schemes)

class _Shaper:
    scheme = "?"

    def __init__(self, n, k, pmf):
        self.n = n
        self.k = k
        self.pmf = pmf

    def encode(self, word: BitWord) -> list[int]:
        raise NotImplementedError

    def decode(self, seq) -> BitWord:
        raise NotImplementedError


class _CcdmShaper(_Shaper):
    scheme = "ccdm"

    def __init__(self, cb: _ccdm.CcdmCodebook):
        super().__init__(cb.n, cb.k, cb.induced_pmf())
        self.cb = cb

    def encode(self, word):
        return _ccdm.ccdm_encode(word, self.cb)

    def decode(self, seq):
        return _ccdm.ccdm_decode(seq, self.cb)


class _MpdmShaper(_Shaper):
    scheme = "mpdm"

    def __init__(self, cb: _mpdm.MpdmCodebook):
        super().__init__(cb.n, cb.k, cb.target.pmf())
        self.cb = cb

    def encode(self, word):
        return _mpdm.mpdm_encode(word, self.cb)

    def decode(self, seq):
        return _mpdm.mpdm_decode(seq, self.cb)


class _SphereShaper(_Shaper):
    def __init__(self, structure):
        pmf, _ = _spsh.induced_pmf(structure)
        super().__init__(structure.n, structure.k, pmf)
        self.structure = structure
        self.scheme = structure.kind

    def encode(self, word):
        if self.structure.kind == "ess":
            return _spsh.ess_encode(word, self.structure)
        return _spsh.sm_encode(word, self.structure)

    def decode(self, seq):
        if self.structure.kind == "ess":
            return _spsh.ess_decode(seq, self.structure)
        return _spsh.sm_decode(seq, self.structure)


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class PasConfig:
    """Full parameterization of one simulated link."""

    m: int
    rate: float                    # transmission rate, bit/1-D
    scheme: dict                   # {"kind": ..., scheme-specific sizing keys}
    ldpc: dict                     # {"family": "wifi", "rate": "5/6"} | {"alist": path} | {"qc_json": path}
    snr_db: tuple
    seed: int = 0
    max_iter: int = 50
    decoder: str = "sum-product"
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    batch_frames: int = 256
    workers: int = 1

    @classmethod
    def from_json(cls, text: str) -> "PasConfig":
        doc = json.loads(text)
        if "rate" not in doc and "rate_2d" in doc:
            doc["rate"] = doc.pop("rate_2d") / 2.0
        doc["snr_db"] = tuple(float(s) for s in doc["snr_db"])
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)

    def to_json(self) -> str:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["snr_db"] = list(doc["snr_db"])
        return json.dumps(doc, indent=1)


class PasChain:
    """A config resolved into live objects (code, labeling, shaper)."""

    def __init__(self, cfg: PasConfig):
        self.cfg = cfg
        self.labeling = BrgcLabeling(cfg.m)
        self.alph = AmplitudeAlphabet(cfg.m)
        self.code = _load_code(cfg.ldpc)
        if self.code.n_c % cfg.m:
            raise ConfigError(f"codeword length {self.code.n_c} not divisible by m={cfg.m}")
        self.n = self.code.n_c // cfg.m
        kind = cfg.scheme.get("kind", "ess")
        if kind == "uniform":
            if Fraction(cfg.rate).limit_denominator(10**6) != self.code.rate * cfg.m:
                raise ConfigError(
                    f"uniform signaling at rate {cfg.rate} needs a rate-{cfg.rate}/{cfg.m} code, "
                    f"got {self.code.rate}")
            self.shaper = None
            self.k = self.code.k_c
            self.gamma_n = 0
            self.pmf = np.full(self.alph.n_a, 1.0 / self.alph.n_a)
        else:
            gamma = self.code.rate * cfg.m - (cfg.m - 1)
            gamma_n = gamma * self.n
            if gamma < 0 or gamma_n.denominator != 1:
                raise ConfigError(f"code rate {self.code.rate} incompatible with PAS at m={cfg.m}")
            self.gamma_n = int(gamma_n)
            k = Fraction(cfg.rate).limit_denominator(10**6) * self.n - gamma_n
            if k.denominator != 1 or k <= 0:
                raise ConfigError(f"shaper input length k = {k} is not a positive integer")
            self.k = int(k)
            self.shaper = _make_shaper(kind, cfg.scheme, self.alph, self.n, self.k)
            self.pmf = self.shaper.pmf
        self.p_x = _metrics.symbol_pmf(self.pmf)
        self.rates = None
        if self.shaper is not None:
            self.rates = _metrics.PasRates(cfg.m, self.n, self.k, self.code.rate)

    @property
    def info_bits(self) -> int:
        return self.k if self.shaper is None else self.k + self.gamma_n


def _load_code(spec: dict) -> _ldpc.LdpcCode:
    if "alist" in spec:
        return _ldpc.load_alist(spec["alist"])
    if "qc_json" in spec:
        return _ldpc.load_qc_json(spec["qc_json"])
    if spec.get("family", "wifi") in ("wifi", "80211", "802.11"):
        return _ldpc.wifi_code(spec["rate"])
    raise ConfigError(f"unrecognized ldpc spec {spec}")


def _make_shaper(kind: str, spec: dict, alph: AmplitudeAlphabet, n: int, k: int) -> _Shaper:
    kind = kind.lower()
    if kind == "ccdm":
        if "composition" in spec:
            comp = Composition(tuple(spec["composition"]))
        else:
            comp = _metrics.state_for_rate("ccdm", alph, n, k).extra["composition"]
        return _CcdmShaper(_ccdm.CcdmCodebook(alph, comp, k))
    if kind == "mpdm":
        if "composition" in spec:
            comp = Composition(tuple(spec["composition"]))
        else:
            comp = _metrics.state_for_rate("mpdm", alph, n, k).extra["composition"]
        return _MpdmShaper(_mpdm.build_mpdm(comp, alph, k_limit=k))
    if kind in ("ess", "sm"):
        e_max = spec.get("e_max") or _spsh.min_radius(n, alph, k)
        precision = spec.get("precision", "fp")
        if kind == "ess":
            structure = _spsh.build_ess_trellis(n, alph, e_max, precision).with_k(k)
        else:
            structure = _spsh.build_sm_tables(n, alph, e_max, precision).with_k(k)
        return _SphereShaper(structure)
    raise ConfigError(f"unknown scheme kind {kind!r}")


# ---------------------------------------------------------------------------
# transmit / receive

def pas_transmit(u: np.ndarray, chain: PasChain) -> np.ndarray:
    """Map information bits to n real channel symbols."""
    u = np.asarray(u, dtype=np.uint8)
    if len(u) != chain.info_bits:
        raise ConfigError(f"need {chain.info_bits} information bits, got {len(u)}")
    m = chain.cfg.m
    lab = chain.labeling
    if chain.shaper is None:
        cw = chain.code.encode(u)
        groups = cw.reshape(chain.n, m)
        amps = np.array([lab.amplitude_from_bits(g[1:]) for g in groups], dtype=float)
        signs = np.where(groups[:, 0] == 1, -1.0, 1.0)
        return signs * amps

    word = BitWord(int.from_bytes(np.packbits(u[:chain.k]).tobytes(), "big") >> (-len(u[:chain.k]) % 8), chain.k)
    amps = chain.shaper.encode(word)
    amp_bits = np.empty((chain.n, m - 1), dtype=np.uint8)
    for i, a in enumerate(amps):
        amp_bits[i] = lab.amplitude_bits(a)
    info = np.concatenate([amp_bits.reshape(-1), u[chain.k:]])
    cw = chain.code.encode(info)
    sign_bits = cw[chain.n * (m - 1):]  # extra data bits then parity
    signs = np.where(sign_bits == 1, -1.0, 1.0)
    return signs * np.asarray(amps, dtype=float)


def _codeword_llrs(sym_llrs: np.ndarray, chain: PasChain) -> np.ndarray:
    """Reorder per-symbol bit-level LLRs (..., n, m) into codeword order."""
    m = chain.cfg.m
    if chain.shaper is None:
        return sym_llrs.reshape(sym_llrs.shape[:-2] + (chain.n * m,))
    amp_part = sym_llrs[..., 1:].reshape(sym_llrs.shape[:-2] + (chain.n * (m - 1),))
    sign_part = sym_llrs[..., 0]
    return np.concatenate([amp_part, sign_part], axis=-1)


def pas_receive(y: np.ndarray, chain: PasChain, snr_db: float,
                decode_result: _ldpc.DecodeResult | None = None) -> np.ndarray:
    """Recover the information bits from channel output; inverse of transmit
    in the error-free case.  Raises DeshapeFailure when the decoded amplitude
    sequence is not a shaper codeword."""
    if decode_result is None:
        sym_llrs = llr_matrix(np.asarray(y, float), snr_db, chain.p_x, chain.labeling)
        cw_llrs = _codeword_llrs(sym_llrs, chain)
        decode_result = _ldpc.ldpc_decode(cw_llrs, chain.code, chain.cfg.max_iter, chain.cfg.decoder)
    cw = decode_result.bits
    m = chain.cfg.m
    if chain.shaper is None:
        return cw[: chain.k]
    amp_bits = cw[: chain.n * (m - 1)].reshape(chain.n, m - 1)
    amps = [chain.labeling.amplitude_from_bits(b) for b in amp_bits]
    try:
        word = chain.shaper.decode(amps)
    except ShapingError as exc:
        raise DeshapeFailure(f"decoded amplitudes outside the {chain.shaper.scheme} codebook: {exc}") from exc
    payload = np.array(word.to_bits(), dtype=np.uint8)
    extra = cw[chain.n * (m - 1): chain.code.k_c]
    return np.concatenate([payload, extra])


# ---------------------------------------------------------------------------
# frame-error-rate simulation

def _frame_rng(seed: int, snr_idx: int, frame: int) -> np.random.Generator:
    key = np.array([np.uint64((seed * 0x9E3779B97F4A7C15 + snr_idx) & (2**64 - 1)),
                    np.uint64(frame)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _simulate_batch(chain: PasChain, snr_db: float, snr_idx: int, frames: range) -> tuple[int, int, int]:
    """Simulate a batch of frames; returns (frames, frame_errors, bit_errors)."""
    cfg = chain.cfg
    nbits = chain.info_bits
    batch = len(frames)
    us = np.empty((batch, nbits), dtype=np.uint8)
    ys = np.empty((batch, chain.n))
    es = float(np.sum(chain.p_x * chain.labeling.points**2))
    sigma = math.sqrt(es / 10 ** (snr_db / 10))
    for i, f in enumerate(frames):
        rng = _frame_rng(cfg.seed, snr_idx, f)
        us[i] = rng.integers(0, 2, size=nbits, dtype=np.uint8)
        x = pas_transmit(us[i], chain)
        ys[i] = x + sigma * rng.standard_normal(chain.n)
    sym_llrs = llr_matrix(ys, snr_db, chain.p_x, chain.labeling)
    cw_llrs = _codeword_llrs(sym_llrs, chain)
    res = _ldpc.ldpc_decode(cw_llrs, chain.code, cfg.max_iter, cfg.decoder)
    frame_err = 0
    bit_err = 0
    for i in range(batch):
        one = _ldpc.DecodeResult(res.bits[i], res.converged[i], res.iterations[i])
        try:
            u_hat = pas_receive(None, chain, snr_db, decode_result=one)
            errs = int(np.count_nonzero(u_hat != us[i]))
        except DeshapeFailure:
            # payload unrecoverable; extra bits still compared via the codeword
            extra_hat = one.bits[chain.n * (chain.cfg.m - 1): chain.code.k_c]
            errs = chain.k + int(np.count_nonzero(extra_hat != us[i][chain.k:]))
        if errs:
            frame_err += 1
            bit_err += errs
    return batch, frame_err, bit_err


_WORKER_CHAIN = None


def _worker_init(cfg_json: str):
    global _WORKER_CHAIN
    _WORKER_CHAIN = PasChain(PasConfig.from_json(cfg_json))


def _worker_run(args):
    snr_db, snr_idx, lo, hi = args
    return _simulate_batch(_WORKER_CHAIN, snr_db, snr_idx, range(lo, hi))


def simulate_fer(cfg: PasConfig, chain: PasChain | None = None, progress=None) -> list[dict]:
    """Monte-Carlo FER/BER per SNR point.

    Runs rounds of batch_frames*workers frames until at least
    min_frame_errors frame errors are seen (or max_frames reached); every
    scheduled round is fully counted, making output deterministic for a
    given (seed, workers).
    """
    if chain is None:
        chain = PasChain(cfg)
    rows = []
    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(cfg.workers, initializer=_worker_init, initargs=(cfg.to_json(),))
    try:
        for snr_idx, snr in enumerate(cfg.snr_db):
            frames = errors = biterrs = 0
            nxt = 0
            while errors < cfg.min_frame_errors and frames < cfg.max_frames:
                spans = []
                for _ in range(max(cfg.workers, 1)):
                    take = min(cfg.batch_frames, cfg.max_frames - nxt)
                    if take <= 0:
                        break
                    spans.append((float(snr), snr_idx, nxt, nxt + take))
                    nxt += take
                if not spans:
                    break
                if pool is not None:
                    results = list(pool.map(_worker_run, spans))
                else:
                    results = [_simulate_batch(chain, s, i, range(lo, hi)) for s, i, lo, hi in spans]
                for fr, fe, be in results:
                    frames += fr
                    errors += fe
                    biterrs += be
                if progress:
                    progress(snr, frames, errors)
            rows.append({
                "snr_db": float(snr), "frames": frames, "frame_errors": errors,
                "bit_errors": biterrs, "fer": errors / frames if frames else math.nan,
                "ber": biterrs / (frames * chain.info_bits) if frames else math.nan,
            })
    finally:
        if pool is not None:
            pool.shutdown()
    return rows
