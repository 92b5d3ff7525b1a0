"""Binary LDPC codes: quasi-cyclic tables, alist I/O, systematic encoding
and batched belief-propagation decoding.

The 802.11 n=648 prototype tables (rates 1/2, 2/3, 3/4, 5/6, Z=27) ship as
package data.  Quasi-cyclic codes with the usual dual-diagonal parity part
are encoded by back-substitution: summing all block rows isolates the first
parity block, after which the dual diagonal telescopes row by row.  Codes
without that structure (e.g. loaded from alist) fall back to a dense GF(2)
elimination computed once per code.

The decoder is flooding sum-product (min-sum optional) over a flat edge
list, vectorized across a whole batch of frames with per-frame early
stopping on a zero syndrome.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import numpy as np

from .errors import ConfigError

__all__ = ["LdpcCode", "wifi_code", "load_alist", "load_qc_json", "ldpc_decode", "DecodeResult"]

_LLR_CLIP = 25.0
_TANH_EPS = 1e-12


@dataclass
class LdpcCode:
    """Parity-check matrix plus a systematic encoder.

    ``H`` is dense uint8 (small codes only; 802.11 is 324x648 at most).
    Information bits occupy columns 0..k-1, parity the remainder.
    """

    H: np.ndarray
    name: str = "ldpc"
    qc: tuple | None = None  # (base_matrix, z) when quasi-cyclic

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=np.uint8)
        self.n_c = self.H.shape[1]
        self.n_parity = self.H.shape[0]
        self.k_c = self.n_c - self.n_parity
        self.rate = Fraction(self.k_c, self.n_c)
        self._edges = None
        self._solve = None

    # -- encoding ----------------------------------------------------------

    def encode(self, info: np.ndarray) -> np.ndarray:
        """Systematic codeword(s) c with H c = 0; info appears verbatim first.

        ``info`` is (..., k_c) of 0/1; returns (..., n_c).
        """
        info = np.asarray(info, dtype=np.uint8)
        if info.shape[-1] != self.k_c:
            raise ConfigError(f"info length {info.shape[-1]} != k_c {self.k_c}")
        flat = info.reshape(-1, self.k_c)
        if self.qc is not None:
            parity = self._encode_qc(flat)
        else:
            parity = self._encode_dense(flat)
        return np.concatenate([flat, parity], axis=1).reshape(info.shape[:-1] + (self.n_c,))

    def _encode_qc(self, info: np.ndarray) -> np.ndarray:
        base, z = self.qc
        mb = len(base)
        kb = len(base[0]) - mb
        blocks = info.reshape(len(info), kb, z)

        def rot(block, s):
            return np.roll(block, -s, axis=1) if s else block

        # syndrome of the information part, per block row
        syn = np.zeros((mb, len(info), z), dtype=np.uint8)
        for r in range(mb):
            acc = np.zeros((len(info), z), dtype=np.uint8)
            for c in range(kb):
                s = base[r][c]
                if s >= 0:
                    acc ^= rot(blocks[:, c], s)
            syn[r] = acc
        # p0 from the sum of all rows (the two shifted entries of the first
        # parity column cancel, leaving its unshifted middle entry)
        p = np.zeros((mb, len(info), z), dtype=np.uint8)
        p0 = syn[0].copy()
        for r in range(1, mb):
            p0 ^= syn[r]
        p[0] = p0
        col0 = [base[r][kb] for r in range(mb)]
        # forward substitution down the dual diagonal
        prev = np.zeros_like(p0)
        for r in range(mb - 1):
            t = syn[r] ^ prev
            if col0[r] >= 0:
                t ^= rot(p0, col0[r])
            p[r + 1] = t
            prev = t
        return np.concatenate([p[r] for r in range(mb)], axis=1)

    def _encode_dense(self, info: np.ndarray) -> np.ndarray:
        solve = self._parity_solver()
        return (info @ solve) % 2

    def _parity_solver(self) -> np.ndarray:
        """(k_c, n_parity) matrix S with parity = info @ S mod 2."""
        if self._solve is not None:
            return self._solve
        m, n = self.H.shape
        A = self.H.astype(np.uint8).copy()
        # eliminate on the parity columns k_c..n_c-1
        perm = []
        row = 0
        for col in range(self.k_c, n):
            pivots = np.flatnonzero(A[row:, col]) + row
            if len(pivots) == 0:
                raise ConfigError("parity part of H is singular; cannot build a systematic encoder")
            if pivots[0] != row:
                A[[row, pivots[0]]] = A[[pivots[0], row]]
            mask = np.flatnonzero(A[:, col])
            mask = mask[mask != row]
            A[mask] ^= A[row]
            perm.append(col)
            row += 1
        # now A = [B | I] up to row order: parity_j = sum_i B[j,i] info_i
        S = A[:, : self.k_c].T.copy()
        self._solve = S
        return S

    # -- decoder wiring ----------------------------------------------------

    def edges(self):
        """(edge_var, check_slots, slot_of_edge) arrays for the BP decoder."""
        if self._edges is None:
            chk, var = np.nonzero(self.H)
            order = np.lexsort((var, chk))
            chk, var = chk[order], var[order]
            deg = np.bincount(chk, minlength=self.n_parity)
            dmax = int(deg.max())
            slots = np.full((self.n_parity, dmax), -1, dtype=np.int64)
            pos = np.zeros(self.n_parity, dtype=np.int64)
            eid = np.arange(len(var))
            slot_idx = np.empty(len(var), dtype=np.int64)
            for e, (c, v) in enumerate(zip(chk, var)):
                slots[c, pos[c]] = e
                slot_idx[e] = pos[c]
                pos[c] += 1
            self._edges = (var.astype(np.int64), slots, deg, eid, slot_idx)
        return self._edges

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        return (bits.astype(np.uint8) @ self.H.T) % 2


def _expand_qc(base, z: int) -> np.ndarray:
    mb, nb = len(base), len(base[0])
    H = np.zeros((mb * z, nb * z), dtype=np.uint8)
    eye = np.eye(z, dtype=np.uint8)
    for r in range(mb):
        for c in range(nb):
            s = base[r][c]
            if s >= 0:
                H[r * z:(r + 1) * z, c * z:(c + 1) * z] = np.roll(eye, s, axis=1)
    return H


def wifi_code(rate: str) -> LdpcCode:
    """802.11 n=648 code at rate "1/2", "2/3", "3/4" or "5/6"."""
    doc = json.loads(resources.files("ampshape.data").joinpath("wifi_ldpc.json").read_text())
    if rate not in doc["rates"]:
        raise ConfigError(f"no 802.11 table for rate {rate}; have {sorted(doc['rates'])}")
    base = doc["rates"][rate]
    z = doc["z"]
    return LdpcCode(_expand_qc(base, z), name=f"wifi648-{rate.replace('/', '')}", qc=(base, z))


def load_qc_json(path: str) -> LdpcCode:
    """Quasi-cyclic prototype from JSON: {"z": int, "base": [[shift|-1,...],...]}."""
    with open(path) as f:
        doc = json.load(f)
    return LdpcCode(_expand_qc(doc["base"], doc["z"]), name=doc.get("name", "qc"), qc=(doc["base"], doc["z"]))


def load_alist(path: str) -> LdpcCode:
    """Standard alist file (1-indexed neighbor lists, zero padding allowed)."""
    with open(path) as f:
        tok = f.read().split()
    it = iter(tok)
    n = int(next(it))
    m = int(next(it))
    next(it), next(it)  # max degrees
    col_deg = [int(next(it)) for _ in range(n)]
    [int(next(it)) for _ in range(m)]  # row degrees
    H = np.zeros((m, n), dtype=np.uint8)
    for v in range(n):
        for _ in range(col_deg[v]):
            c = int(next(it))
            if c:
                H[c - 1, v] = 1
    return LdpcCode(H, name="alist")


@dataclass
class DecodeResult:
    bits: np.ndarray        # (B, n_c) hard decisions
    converged: np.ndarray   # (B,) zero-syndrome flags
    iterations: np.ndarray  # (B,) iterations spent


def ldpc_decode(llrs: np.ndarray, code: LdpcCode, max_iter: int = 50, algo: str = "sum-product") -> DecodeResult:
    """Flooding belief propagation over a batch of frames.

    ``llrs`` is (B, n_c) or (n_c,), positive meaning bit=0.  Stops each frame
    early once its syndrome is zero; non-convergence is reported, never
    raised.
    """
    single = llrs.ndim == 1
    llr = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    if llr.shape[1] != code.n_c:
        raise ConfigError(f"LLR length {llr.shape[1]} != n_c {code.n_c}")
    if algo not in ("sum-product", "min-sum"):
        raise ConfigError(f"unknown decoder {algo!r}")
    var, slots, _deg, _eid, _slot_idx = code.edges()
    B = llr.shape[0]
    pad = slots < 0
    slots_safe = np.where(pad, 0, slots)
    edge_ids_by_slot = slots[~pad]  # flat edge index for each non-pad (check, slot)

    out_bits = np.empty((B, code.n_c), dtype=np.uint8)
    out_conv = np.zeros(B, dtype=bool)
    out_iter = np.full(B, max_iter, dtype=np.int64)

    active = np.arange(B)
    ch = llr.copy()
    v2c = ch[:, var].copy()
    total = ch.copy()

    for it in range(1, max_iter + 1):
        cur = np.clip(v2c, -_LLR_CLIP, _LLR_CLIP)
        if algo == "sum-product":
            t = np.clip(np.tanh(0.5 * cur), -1 + _TANH_EPS, 1 - _TANH_EPS)
            tm = t[:, slots_safe]
            tm[:, pad] = 1.0
            prod = tm.prod(axis=2)
            c2v_grid = 2.0 * np.arctanh(np.clip(prod[:, :, None] / tm, -1 + _TANH_EPS, 1 - _TANH_EPS))
        else:
            sgn = np.where(cur < 0, -1.0, 1.0)
            sm = sgn[:, slots_safe]
            sm[:, pad] = 1.0
            mm = np.abs(cur)[:, slots_safe]
            mm[:, pad] = np.inf
            total_sign = sm.prod(axis=2)
            part = np.partition(mm, 1, axis=2)
            m1, m2 = part[:, :, 0], part[:, :, 1]
            excl = np.where(mm == m1[:, :, None], m2[:, :, None], m1[:, :, None])
            c2v_grid = total_sign[:, :, None] * sm * excl

        c2v = np.empty_like(v2c)
        c2v[:, edge_ids_by_slot] = c2v_grid[:, ~pad]
        total = ch + _scatter_add(c2v, var, code.n_c)
        v2c = total[:, var] - c2v

        hard = (total < 0).astype(np.uint8)
        syn_ok = _syndrome_ok(hard[:, var], slots, pad)
        done = np.flatnonzero(syn_ok)
        if len(done):
            gidx = active[done]
            out_bits[gidx] = hard[done]
            out_conv[gidx] = True
            out_iter[gidx] = it
            keep = np.flatnonzero(~syn_ok)
            if len(keep) == 0:
                break
            active = active[keep]
            ch = ch[keep]
            v2c = v2c[keep]
            total = total[keep]
    else:
        out_bits[active] = (total < 0).astype(np.uint8)

    if single:
        return DecodeResult(out_bits[0], out_conv[0], out_iter[0])
    return DecodeResult(out_bits, out_conv, out_iter)


def _scatter_add(values: np.ndarray, var: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((values.shape[0], n), dtype=values.dtype)
    np.add.at(out, (slice(None), var), values)
    return out


def _syndrome_ok(syn_bits: np.ndarray, slots: np.ndarray, pad: np.ndarray) -> np.ndarray:
    sm = syn_bits[:, np.where(pad, 0, slots)]
    sm[:, pad] = 0
    parity = sm.sum(axis=2) % 2
    return (parity == 0).all(axis=1)
