"""Command-line front end.

Subcommands: ccdm, mpdm, spsh (shaper build/encode/decode/stats), rateloss,
air, g2c (metric sweeps), cost (complexity accounting), pas (link
simulation).  Sweep outputs are CSV files with documented schemas; a PNG
rendering is written next to each CSV unless --no-plot is given, and every
output file gets a <name>.manifest.json recording the full parameterization
so any run can be replayed.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys

import numpy as np

from . import __version__
from . import ccdm as _ccdm
from . import metrics as _metrics
from . import mpdm as _mpdm
from . import pas as _pas
from . import report as _report
from . import spsh as _spsh
from .core import AmplitudeAlphabet, BitWord, Composition, mb_from_entropy
from .errors import ShapingError
from .labeling import BrgcLabeling


def _parse_grid(text: str) -> list[float]:
    """start:step:stop (inclusive), a comma list, or a single number."""
    if ":" in text:
        start, step, stop = (float(x) for x in text.split(":"))
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(round(v, 10))
            v += step
        return out
    return [float(x) for x in text.split(",")]


def _int_grid(text: str) -> list[int]:
    return [int(round(v)) for v in _parse_grid(text)]


def _parse_composition(text: str) -> Composition:
    return Composition(tuple(int(x) for x in text.split(",")))


def _write_csv(path: str, rows: list[dict], fields: list[str]):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in fields])


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return v


def _manifest(args, outputs: list[str], started: str, seed=None):
    doc = {
        "tool": "ampshape",
        "version": __version__,
        "subcommand": args._subcommand,
        "params": {k: v for k, v in vars(args).items() if not k.startswith("_") and k != "func"},
        "seed": seed,
        "started_utc": started,
        "finished_utc": _now(),
        "outputs": outputs,
    }
    for out in outputs:
        with open(out + ".manifest.json", "w") as f:
            json.dump(doc, f, indent=1, default=str)


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _read_words(path: str, k: int) -> list[BitWord]:
    with open(path) as f:
        return [BitWord.from_hex(line, k) for line in f if line.strip()]


def _write_words(path: str, words: list[BitWord]):
    with open(path, "w") as f:
        for w in words:
            f.write(w.to_hex() + "\n")


def _read_sequences(path: str) -> list[list[int]]:
    with open(path) as f:
        return [[int(x) for x in line.split(",")] for line in f if line.strip()]


def _write_sequences(path: str, seqs: list[list[int]]):
    with open(path, "w") as f:
        for s in seqs:
            f.write(",".join(str(int(a)) for a in s) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_ccdm(args):
    started = _now()
    alph = AmplitudeAlphabet(args.m)
    cb = _ccdm.CcdmCodebook(alph, _parse_composition(args.composition))
    if args.action == "encode":
        words = _read_words(getattr(args, "in"), cb.k)
        _write_sequences(args.out, [_ccdm.ccdm_encode(w, cb) for w in words])
    else:
        seqs = _read_sequences(getattr(args, "in"))
        _write_words(args.out, [_ccdm.ccdm_decode(s, cb) for s in seqs])
    _manifest(args, [args.out], started)
    return 0


def _cmd_mpdm(args):
    started = _now()
    if args.action == "build":
        cb = _mpdm.build_mpdm(_parse_composition(args.target), AmplitudeAlphabet(args.m))
        with open(args.out, "w") as f:
            f.write(cb.to_json())
        _manifest(args, [args.out], started)
        return 0
    if args.action == "stats":
        cb = _mpdm.build_mpdm(_parse_composition(args.target), AmplitudeAlphabet(args.m))
        st = _mpdm.mpdm_stats(cb)
        doc = {k: (v.tolist() if isinstance(v, np.ndarray) else v)
               for k, v in st.items() if k != "pmf_exact"}
        text = json.dumps(doc, indent=1)
        if args.out:
            with open(args.out, "w") as f:
                f.write(text)
            _manifest(args, [args.out], started)
        else:
            print(text)
        return 0
    with open(args.codebook) as f:
        cb = _mpdm.MpdmCodebook.from_json(f.read())
    if args.action == "encode":
        words = _read_words(getattr(args, "in"), cb.k)
        _write_sequences(args.out, [_mpdm.mpdm_encode(w, cb) for w in words])
    else:
        seqs = _read_sequences(getattr(args, "in"))
        _write_words(args.out, [_mpdm.mpdm_decode(s, cb) for s in seqs])
    _manifest(args, [args.out], started)
    return 0


def _build_spsh(args):
    alph = AmplitudeAlphabet(args.m)
    if args.algo == "ess":
        s = _spsh.build_ess_trellis(args.n, alph, args.e_max, args.precision)
    else:
        s = _spsh.build_sm_tables(args.n, alph, args.e_max, args.precision)
    if args.k_bits:
        s = s.with_k(args.k_bits)
    return s


def _cmd_spsh(args):
    started = _now()
    if args.action == "build":
        s = _build_spsh(args)
        _spsh.save_structure(s, args.out)
        _manifest(args, [args.out], started)
        return 0
    if args.action == "stats":
        s = _build_spsh(args)
        pmf, energy = _spsh.induced_pmf(s)
        doc = {
            "algo": s.kind, "n": s.n, "e_max": s.e_max, "L": s.L, "k": s.k,
            "size_log2": float(_log2_big(s.size)), "rs": float(_log2_big(s.size) / s.n),
            "precision": s.precision, "pmf": pmf.tolist(), "avg_energy": energy,
            "rate_loss": float(-np.sum(pmf[pmf > 0] * np.log2(pmf[pmf > 0])) - s.k / s.n),
        }
        text = json.dumps(doc, indent=1)
        if args.out:
            with open(args.out, "w") as f:
                f.write(text)
            _manifest(args, [args.out], started)
        else:
            print(text)
        return 0
    s = _spsh.load_structure(args.structure)
    if args.action == "encode":
        words = _read_words(getattr(args, "in"), s.k)
        enc = _spsh.ess_encode if s.kind == "ess" else _spsh.sm_encode
        _write_sequences(args.out, [enc(w, s) for w in words])
    else:
        seqs = _read_sequences(getattr(args, "in"))
        dec = _spsh.ess_decode if s.kind == "ess" else _spsh.sm_decode
        _write_words(args.out, [dec(q, s) for q in seqs])
    _manifest(args, [args.out], started)
    return 0


def _log2_big(x: int) -> float:
    if x.bit_length() <= 900:
        return float(np.log2(float(x)))
    top = x >> (x.bit_length() - 64)
    return float(np.log2(float(top)) + (x.bit_length() - 64))


def _cmd_rateloss(args):
    started = _now()
    alph = AmplitudeAlphabet(args.m)
    target = mb_from_entropy(alph, args.target_entropy).pmf
    rows = _metrics.rate_loss_sweep(target, _int_grid(args.n), alph, tuple(args.schemes.split(",")))
    _write_csv(args.out, rows, ["scheme", "n", "k", "H", "E", "rloss"])
    outputs = [args.out]
    if not args.no_plot:
        png = args.out.rsplit(".", 1)[0] + ".png"
        _report.render_rateloss(rows, png)
        outputs.append(png)
    _manifest(args, outputs, started)
    return 0


def _cmd_air(args):
    started = _now()
    alph = AmplitudeAlphabet(args.m)
    k = int(round(args.shaping_rate * args.n))
    states = [_metrics.state_for_rate(s, alph, args.n, k) for s in args.schemes.split(",")]
    states.append(_metrics.scheme_state("uniform", alph, args.n))
    rows = _metrics.air_sweep(states, _parse_grid(args.snr), BrgcLabeling(args.m))
    _write_csv(args.out, rows, ["scheme", "snr_db", "air"])
    outputs = [args.out]
    if not args.no_plot:
        png = args.out.rsplit(".", 1)[0] + ".png"
        _report.render_air(rows, png)
        outputs.append(png)
    _manifest(args, outputs, started)
    return 0


def _cmd_g2c(args):
    started = _now()
    rows = _metrics.g2c_sweep(args.m, args.rate, _parse_grid(args.hx))
    _write_csv(args.out, rows, ["Hx", "Rc", "delta_snr_db"])
    outputs = [args.out]
    if not args.no_plot:
        png = args.out.rsplit(".", 1)[0] + ".png"
        _report.render_g2c(rows, png)
        outputs.append(png)
    if args.find_min:
        opt = _metrics.optimal_mb_operating_point(args.m, args.rate)
        print(json.dumps(opt, indent=1))
    _manifest(args, outputs, started)
    return 0


def _cmd_cost(args):
    started = _now()
    alph = AmplitudeAlphabet(args.m)
    comp = _parse_composition(args.composition) if args.composition else None
    reports = []
    for scheme in args.scheme.split(","):
        for precision in args.precision.split("/"):
            reports.append(_metrics.cost_report(scheme, args.n, alph, precision,
                                                e_max=args.e_max, composition=comp))
    doc = [r.as_dict() for r in reports]
    text = json.dumps(doc, indent=1)
    outputs = []
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        outputs.append(args.out)
        if not args.no_plot:
            png = args.out.rsplit(".", 1)[0] + ".png"
            _report.render_cost(reports, png)
            outputs.append(png)
        _manifest(args, outputs, started)
    else:
        print(text)
    return 0


def _cmd_pas(args):
    started = _now()
    with open(args.config) as f:
        cfg = _pas.PasConfig.from_json(f.read())
    if args.seed is not None:
        cfg = _replace_cfg(cfg, seed=args.seed)
    if args.workers is not None:
        cfg = _replace_cfg(cfg, workers=args.workers)
    rows = _pas.simulate_fer(cfg, progress=_progress if args.verbose else None)
    _write_csv(args.out, rows, ["snr_db", "frames", "frame_errors", "bit_errors", "fer", "ber"])
    outputs = [args.out]
    if not args.no_plot:
        png = args.out.rsplit(".", 1)[0] + ".png"
        _report.render_fer({cfg.scheme.get("kind", "ess"): rows}, png)
        outputs.append(png)
    _manifest(args, outputs, started, seed=cfg.seed)
    return 0


def _replace_cfg(cfg, **kw):
    import dataclasses

    return dataclasses.replace(cfg, **kw)


def _progress(snr, frames, errors):
    print(f"  snr={snr:g} dB: {frames} frames, {errors} frame errors", file=sys.stderr)


# ---------------------------------------------------------------------------

def _add_io(p, needs_in=True):
    if needs_in:
        p.add_argument("--in", required=True, help="input file")
    p.add_argument("--out", required=True, help="output file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ampshape",
                                 description="finite-blocklength amplitude shaping toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="_subcommand", required=True)

    p = sub.add_parser("ccdm", help="constant-composition matcher")
    p.add_argument("action", choices=["encode", "decode"])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--composition", required=True, help="comma-separated counts")
    _add_io(p)
    p.set_defaults(func=_cmd_ccdm)

    p = sub.add_parser("mpdm", help="multiset-partition matcher")
    p.add_argument("action", choices=["build", "encode", "decode", "stats"])
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--target", help="target composition (build/stats)")
    p.add_argument("--codebook", help="codebook JSON (encode/decode)")
    p.add_argument("--in", help="input file")
    p.add_argument("--out", help="output file")
    p.set_defaults(func=_cmd_mpdm)

    p = sub.add_parser("spsh", help="sphere shaping (ESS / SM)")
    p.add_argument("action", choices=["build", "encode", "decode", "stats"])
    p.add_argument("--algo", choices=["ess", "sm"], default="ess")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int)
    p.add_argument("--e-max", dest="e_max", type=int)
    p.add_argument("--k-bits", dest="k_bits", type=int, help="force operational input length")
    p.add_argument("--precision", default="fp", help="fp or bp:<n_m>,<n_p>")
    p.add_argument("--structure", help="saved container (encode/decode)")
    p.add_argument("--in", help="input file")
    p.add_argument("--out", help="output file")
    p.set_defaults(func=_cmd_spsh)

    p = sub.add_parser("rateloss", help="rate loss vs blocklength sweep")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--target-entropy", dest="target_entropy", type=float, required=True)
    p.add_argument("--n", required=True, help="grid start:step:stop or comma list")
    p.add_argument("--schemes", default="ccdm,mpdm,ess,sm")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", dest="no_plot", action="store_true")
    p.set_defaults(func=_cmd_rateloss)

    p = sub.add_parser("air", help="finite-length AIR vs SNR sweep")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--shaping-rate", dest="shaping_rate", type=float, required=True, help="k/n in bit/1-D")
    p.add_argument("--snr", required=True, help="dB grid start:step:stop")
    p.add_argument("--schemes", default="ccdm,mpdm,ess")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", dest="no_plot", action="store_true")
    p.set_defaults(func=_cmd_air)

    p = sub.add_parser("g2c", help="gap-to-capacity over the MB family")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--rate", type=float, required=True, help="target rate, bit/1-D")
    p.add_argument("--hx", required=True, help="H(X) grid start:step:stop")
    p.add_argument("--find-min", dest="find_min", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", dest="no_plot", action="store_true")
    p.set_defaults(func=_cmd_g2c)

    p = sub.add_parser("cost", help="storage/serialism/computation accounting")
    p.add_argument("--scheme", required=True, help="comma list of ess,sm,ccdm,sr")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--e-max", dest="e_max", type=int)
    p.add_argument("--precision", default="fp", help="slash-separated list, e.g. fp/bp:9,7")
    p.add_argument("--composition", help="needed for ccdm/sr")
    p.add_argument("--out")
    p.add_argument("--no-plot", dest="no_plot", action="store_true")
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("pas", help="end-to-end AWGN frame error rate")
    p.add_argument("action", choices=["simulate"])
    p.add_argument("--config", required=True, help="JSON PasConfig")
    p.add_argument("--out", required=True, help="fer.csv path")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--no-plot", dest="no_plot", action="store_true")
    p.set_defaults(func=_cmd_pas)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ShapingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
