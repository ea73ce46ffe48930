"""Command-line front end: one subcommand per module, JSON reports, CSV sweeps.

Exit codes: 0 success, 64 usage or validation, 65 budget, 70 failed assertion.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from . import capp, diag, kolmogorov as kol, nwprg, primes, rktconstruct as rk
from .circuits import read_netlist, to_netlist
from .errors import BudgetError, OracleError
from .machines import SeededSampler
from .manifest import load_manifest
from .parallel import map_ordered

EXIT_USAGE, EXIT_BUDGET, EXIT_ASSERT = 64, 65, 70
_NOT_CONFIG = {"out", "workers", "config", "func", "command", "action"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_range(text: str) -> tuple[list[int], bool]:
    """'5' -> ([5], False); '2:6' -> ([2, 3, 4, 5], True), half-open."""
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi))), True
    return [int(text)], False


def _fraction(text: str) -> Fraction:
    return Fraction(text)


# Generator configs.

def capp_gen(args) -> capp.CappGenConfig | capp.FixedGenConfig:
    spec = args.gen
    if spec in ("identity", "constant", "nw"):
        return capp.CappGenConfig(spec, args.eps, args.k, args.alpha, value=args.value)
    data = json.loads(Path(spec).read_text())
    if "family" in data:
        return capp.CappGenConfig(**data)
    return capp.FixedGenConfig(nwprg.NWConfig.from_json(json.dumps(data)))


def nw_config(args) -> nwprg.NWConfig:
    if args.gen not in (None, "nw"):
        return nwprg.NWConfig.from_json(Path(args.gen).read_text())
    return nwprg.NWConfig(args.ell, args.k, args.m, args.alpha, args.hard_fn)


def prime_gen(args, n: int) -> nwprg.Generator:
    if args.gen == "identity":
        return nwprg.IdentityGenerator(n)
    if args.gen == "constant":
        v = args.value or "0"
        return nwprg.ConstantGenerator((v * n)[:n])
    if args.gen == "nw":
        return nwprg.NWConfig(args.ell, args.k, n, args.alpha, args.hard_fn).generator()
    return nwprg.NWConfig.from_json(Path(args.gen).read_text()).generator()


def _budget(args) -> kol.ComplexityBudget:
    return kol.ComplexityBudget(args.max_program_bits, args.max_aux_bits, args.max_log_t, args.delta)


def _decider(name: str, n: int) -> rk.DeciderSpec:
    if name == "parity":
        return rk.parity_decider(n)
    if name in ("constant0", "constant1"):
        return rk.constant_decider(int(name[-1]))
    raise UsageError(f"unknown language {name!r}")


def _sampler(args, label: str, n: int = 0) -> SeededSampler:
    return SeededSampler(label, n, 0, args.seed)


# Handlers return either a JSON-able dict or a ("csv", text) pair.

def _witness_json(w) -> dict | None:
    if w is None:
        return None
    return {"program": w.program.hex(), "listing": str(w.program), "aux": w.aux, "t": w.t}


def kolmo_measure(args):
    b = _budget(args)
    if args.measure == "kt":
        rep = kol.kt(args.x, b)
    elif args.measure == "rkt":
        rep = kol.rkt(args.x, b)
    else:
        rep = kol.rk_t(args.x, args.t or b.max_steps, b)
    return {
        "measure": rep.measure,
        "x": rep.x,
        "value": rep.value,
        "witness": _witness_json(rep.witness),
        "probability": None if rep.probability is None else str(rep.probability),
        "exhausted": rep.exhausted,
    }


def kolmo_census(args):
    measure = {"kt": "Kt", "rkt": "rKt"}.get(args.measure)
    if measure is None:
        raise UsageError("census supports kt and rkt")
    hist = kol.rkt_census(args.m, _budget(args), measure)
    keys = sorted((k for k in hist if k is not None)) + ([None] if None in hist else [])
    return "csv", "value,count\n" + "".join(f"{'none' if k is None else k},{hist[k]}\n" for k in keys)


def capp_run(args):
    c = read_netlist(args.circuit)
    inst = capp.CappInstance(args.n, c, args.d) if args.n else capp.CappInstance.fit(c, args.d)
    if args.action == "exact":
        est = capp.capp_exact(inst)
    elif args.action == "sample":
        est = capp.capp_sample(inst, args.samples, _sampler(args, "capp-sample", inst.n))
    else:
        est = capp.capp_pseudodet(inst, capp_gen(args))
    return est.as_json(capp.capp_success(inst, est))


def prg_gen(args):
    cfg = nw_config(args)
    g = cfg.generator()
    seed = args.seed_bits if args.seed_bits is not None else _sampler(args, "prg-seed").bits(g.seed_len)
    return {"seed_bits": seed, "output": g.generate(seed), "sets": [list(s) for s in g.design.sets], "config": json.loads(cfg.to_json())}


def prg_advantage(args):
    d, g = read_netlist(args.circuit), nw_config(args).generator()
    if args.samples:
        rep = nwprg.advantage_sample(d, g, args.samples, _sampler(args, "prg-advantage"))
    else:
        rep = nwprg.advantage_exact(d, g)
    return {"advantage": str(rep.advantage), "mode": rep.mode, "p_uniform": str(rep.p_uniform), "p_generator": str(rep.p_generator)}


def prg_predict(args):
    res = nwprg.hybrid_predictor(read_netlist(args.circuit), nw_config(args).generator())
    return {
        "position": res.position,
        "advantage": str(res.advantage),
        "total": str(res.total),
        "hybrids": [str(h) for h in res.hybrids],
        "predictor": None if res.predictor is None else to_netlist(res.predictor),
    }


def _diag_points(args):
    ns, n_ranged = parse_range(args.n)
    if args.i is None:
        return [(i, n) for n in ns for i in range(1 << diag.index_width(n))], n_ranged, False
    idx, i_ranged = parse_range(args.i)
    return [(i, n) for n in ns for i in idx], n_ranged, i_ranged


def diag_run(args):
    cfg = capp_gen(args)
    if args.action == "decide":
        x = args.x if args.x is not None else diag.DiagInput.of(int(args.i or 0), int(args.n)).raw
        return {"x": x, "decision": diag.diag_decide(x, cfg, args.d)}
    points, n_ranged, i_ranged = _diag_points(args)
    if n_ranged and i_ranged:
        raise UsageError("sweep takes exactly one ranged parameter")
    if args.action == "verify" and not (n_ranged or i_ranged) and len(points) == 1:
        rep = diag.diag_verify(points[0][0], points[0][1], cfg, args.d)
        return {
            "i": rep.i,
            "n": rep.n,
            "verdict": rep.verdict,
            "acceptance": str(rep.acceptance),
            "mu": None if rep.mu is None else str(rep.mu),
            "decision": rep.decision,
        }
    rows = map_ordered(diag.sweep_row, [(i, n, cfg, args.d) for i, n in points], args.workers)
    return "csv", "i,n,verdict,capp_err\n" + "".join(r + "\n" for r in rows)


def rkt_run(args):
    b = _budget(args)
    if args.action == "construct":
        inst = rk.RndSearchInstance(args.n, args.d)
        res = rk.construct_high_rkt(inst, capp_gen(args), args.b_mode, b, args.rand_bits, workers=args.workers)
        return {**res.as_json(), "m": inst.m, "index": res.index, "status": "FAIL" if res.failed else "OK"}
    if args.action == "embed":
        supplier = lambda m: rk.high_rkt_string(m, capp_gen(args), args.b_mode, b, args.rand_bits, workers=args.workers).string
        tt = rk.embed_hard_language(supplier, args.n, args.t_n, args.eps_embed)
        w = tt.bits[: tt.prefix]
        return {"string": tt.bits, "prefix": tt.prefix, "oracle_rkt": kol.rkt(w, b).value, "canonical": True}
    if args.action == "extract":
        y = rk.extract_string(_decider(args.lang, args.n).decide, args.n, args.m)
        value = kol.rkt(y, b).value if len(y) <= kol.CENSUS_MAX_LENGTH else None
        return {"string": y, "oracle_rkt": value, "canonical": True}
    # fact51
    spec = _decider(args.lang, args.n)
    ells, ranged = parse_range(args.ell)
    ws = [(ell, rk.fact51_witness(spec, args.n, ell)) for ell in ells]
    if ranged:
        return "csv", "ell,cost,bound\n" + "".join(f"{ell},{w.cost},{w.bound}\n" for ell, w in ws)
    ell, w = ws[0]
    return {"string": w.prefix, "program": w.program.hex(), "t": w.t, "cost": w.cost, "bound": w.bound, "canonical": True}


def primes_run(args):
    g = prime_gen(args, args.n)
    if args.action == "find":
        sp = primes.find_prime_via_prg(g, args.n, args.workers)
        return {"status": "NONE" if sp is None else "OK", **({} if sp is None else sp.as_json())}
    if args.action == "rate":
        rep = primes.random_seed_prime(args.n, args.trials, _sampler(args, "prime-rate", args.n), g, args.advice)
        return rep.as_json()
    sp = primes.find_prime_via_prg(g, args.n, args.workers)
    if sp is None:
        return {"status": "NONE"}
    w = primes.rk_poly_prime_witness(sp)
    return {"status": "OK", "prime": sp.prime, "program": w.program.hex(), "aux": w.aux, "t": w.t, "cost": w.cost, "bound": w.bound}


# Parser.

def _gen_flags(p, default="identity"):
    p.add_argument("--gen", default=default, help="identity | constant | nw | path to a JSON generator config")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--value", default="")


def _nw_flags(p):
    p.add_argument("--gen", default=None, help="path to a JSON generator config")
    p.add_argument("--ell", type=int, default=16)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--hard-fn", default="lk-surrogate")


def _budget_flags(p):
    p.add_argument("--max-program-bits", type=int, default=24)
    p.add_argument("--max-aux-bits", type=int, default=8)
    p.add_argument("--max-log-t", type=int, default=4)
    p.add_argument("--delta", type=_fraction, default=Fraction(2, 3))


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="pseudodet", description=__doc__.splitlines()[0])
    top.add_argument("--seed", type=int, default=0)
    top.add_argument("--out", default=None, help="report path (default: stdout)")
    top.add_argument("--workers", type=int, default=1)
    top.add_argument("--config", default=None, help="JSON file of flag defaults")
    mods = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(group, name, func):
        p = group.add_parser(name)
        p.set_defaults(func=func)
        return p

    kp = mods.add_parser("kolmo").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(kp, "measure", kolmo_measure)
    p.add_argument("--x", required=True)
    p.add_argument("--measure", choices=["kt", "rkt", "rkt-poly"], default="rkt")
    p.add_argument("--t", type=int, default=None)
    _budget_flags(p)
    p = leaf(kp, "census", kolmo_census)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--measure", choices=["kt", "rkt"], default="rkt")
    _budget_flags(p)

    cp = mods.add_parser("capp").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("exact", "sample", "prg"):
        p = leaf(cp, name, capp_run)
        p.add_argument("--circuit", required=True)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--samples", type=int, default=10**5)
        _gen_flags(p)

    pp = mods.add_parser("prg").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(pp, "gen", prg_gen)
    p.add_argument("--seed-bits", default=None)
    _nw_flags(p)
    for name, func in (("advantage", prg_advantage), ("predict", prg_predict)):
        p = leaf(pp, name, func)
        p.add_argument("--circuit", required=True)
        p.add_argument("--samples", type=int, default=0, help="0 means exact")
        _nw_flags(p)

    dp = mods.add_parser("diag").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("decide", "verify", "sweep"):
        p = leaf(dp, name, diag_run)
        p.add_argument("--n", default="32", help="n or a half-open range lo:hi")
        p.add_argument("--i", default=None, help="machine index or range lo:hi (default: all)")
        p.add_argument("--x", default=None)
        p.add_argument("--d", type=int, default=2)
        _gen_flags(p)

    rp = mods.add_parser("rkt").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("construct", "embed", "extract", "fact51"):
        p = leaf(rp, name, rkt_run)
        p.add_argument("--n", type=int, default=16)
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--m", type=int, default=8)
        p.add_argument("--b-mode", choices=[rk.EXACT, rk.MC], default=rk.EXACT)
        p.add_argument("--rand-bits", type=int, default=4)
        p.add_argument("--t-n", type=int, default=2)
        p.add_argument("--eps-embed", type=float, default=1.0)
        p.add_argument("--lang", default="parity")
        p.add_argument("--ell", default="16", help="prefix length or range lo:hi")
        _gen_flags(p)
        _budget_flags(p)

    qp = mods.add_parser("primes").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("find", "rate", "witness"):
        p = leaf(qp, name, primes_run)
        p.add_argument("--n", type=int, default=16)
        p.add_argument("--gen", default="identity", help="identity | constant | nw | path to a JSON generator config")
        p.add_argument("--value", default="")
        p.add_argument("--ell", type=int, default=16)
        p.add_argument("--k", type=int, default=4)
        p.add_argument("--alpha", type=int, default=2)
        p.add_argument("--hard-fn", default="lk-surrogate")
        p.add_argument("--trials", type=int, default=10**5)
        p.add_argument("--advice", type=int, choices=[0, 1], default=None)
    return top


def _leaves(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                if sub.get_default("func") is not None:
                    yield sub
                else:
                    yield from _leaves(sub)


def apply_config_file(parser, path: str) -> None:
    """Flags override the file, the file overrides built-in defaults."""
    data = json.loads(Path(path).read_text())
    known = set()
    for sub in [parser, *_leaves(parser)]:
        dests = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in data.items() if k in dests})
        for a in sub._actions:
            if a.dest in data:
                a.required = False
        known |= dests
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def config_of(args) -> dict:
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=".pseudodet-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, target)


def run(argv=None) -> tuple[str, str | None]:
    """Parse and execute; returns (report text, output path)."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        apply_config_file(parser, known.config)
    args = parser.parse_args(argv)
    start = time.perf_counter()
    result = args.func(args)
    if isinstance(result, tuple) and result[0] == "csv":
        return result[1], args.out
    cfg = config_of(args)
    report = {
        "command": f"{args.command} {args.action}",
        "config": cfg,
        "config_hash": config_hash(cfg),
        "manifest_version": load_manifest().version,
        "seed": args.seed,
        "result": result,
        "timing_s": round(time.perf_counter() - start, 3),
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n", args.out


def main(argv=None) -> int:
    try:
        text, out = run(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except (UsageError, ValueError, json.JSONDecodeError, FileNotFoundError) as e:
        print(f"pseudodet: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as e:
        print(f"pseudodet: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (AssertionError, OracleError) as e:
        print(f"pseudodet: assertion failed: {e}", file=sys.stderr)
        return EXIT_ASSERT
    _emit(text, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
