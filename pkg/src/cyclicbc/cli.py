"""Command-line front end.

Exit codes: 0 success or accepted, 1 rejected or mismatch, 2 usage error,
3 fuel exhausted.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import algebra, checker, evaluator, kernel, nonuniform, prooffmt, translator

OK, REJECTED, USAGE, FUEL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _nats(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok.isdigit():
            raise UsageError(f"not a decimal natural: {tok!r}")
        out.append(int(tok))
    return tuple(out)


def _oracles(specs) -> dict:
    env = {}
    for entry in specs or ():
        name, sep, src = entry.partition("=")
        if not sep or not name:
            raise UsageError(f"--oracle wants name=path or name=builtin:..., got {entry!r}")
        env[name] = evaluator.OracleEntry(prooffmt.load_advice(src), "length-relation")
    return env


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _value(v: int) -> str:
    return f"value: {v}\nbinary: {bin(v)[2:]}\n"


def cmd_check(a) -> int:
    g = prooffmt.load_proof(a.proof)
    v = checker.classify(g)
    print(f"proof: {g.name}")
    print(v.report())
    return OK if v.accepted else REJECTED


def cmd_eval(a) -> int:
    g = prooffmt.load_proof(a.proof)
    env = evaluator.oracle_env(g, _oracles(a.oracle), a.fuel)
    v = evaluator.evaluate(g, g.root, _nats(a.normal), _nats(a.safe), env, fuel=a.fuel)
    sys.stdout.write(_value(v))
    return OK


def cmd_translate(a) -> int:
    t = translator.translate(prooffmt.load_proof(a.proof))
    _emit(algebra.serialize_term(t) + "\n", a.out)
    return OK


def cmd_bound(a) -> int:
    path = Path(a.proof)
    if path.suffix == ".term":
        t = algebra.parse_term(path.read_text(encoding="utf-8"))
    else:
        t = translator.translate(prooffmt.load_proof(path))
    p = algebra.bound_poly(t)
    print(f"bound: {p}")
    print("coefficients: " + " ".join(map(str, p.coeffs or (0,))))
    return OK


def cmd_factor(a) -> int:
    g = prooffmt.load_proof(a.proof)
    new, defs = checker.factor(g)
    stubs = []
    if a.out:
        out = Path(a.out)
        renamed = []
        for o in new.oracles:
            if o.subgraph is not None:
                stub = out.with_name(f"{out.stem}.{o.name}.cbp")
                stub.write_text(prooffmt.serialize_proof(o.subgraph), encoding="utf-8")
                stubs.append(stub)
                o = kernel.OracleDef(o.name, o.normals, o.safes, o.kind, stub.name)
            renamed.append(o)
        new = kernel.ProofGraph(new.name, new.nodes, tuple(renamed))
        out.write_text(prooffmt.serialize_proof(new), encoding="utf-8")
        for s in stubs:
            print(f"wrote {s}")
        print(f"wrote {out}")
    else:
        sys.stdout.write(prooffmt.serialize_proof(new))
        for d in defs:
            sys.stdout.write(f"\n# stub for oracle {d.name}\n")
            sys.stdout.write(prooffmt.serialize_proof(d.subgraph))
    print(f"# classification: {checker.classify(new).classification}", file=sys.stderr)
    return OK


def cmd_expand(a) -> int:
    if not a.oracle or len(a.oracle) != 1:
        raise UsageError("expand needs exactly one --oracle")
    name, _, src = a.oracle[0].partition("=")
    adv = prooffmt.load_advice(src or name)
    k = a.arity if a.arity is not None else (adv.arity or 1)
    g = evaluator.expand_relation(adv, k, a.depth, name=f"expand_{name}")
    _emit(prooffmt.serialize_proof(g), a.out)
    return OK


def _bits_arg(a) -> str:
    if a.input is None:
        raise UsageError("--input bits is required")
    if any(ch not in "01" for ch in a.input):
        raise UsageError(f"--input must be a bit string, got {a.input!r}")
    return a.input


def cmd_circuit_encode(a) -> int:
    fam = nonuniform.get_family(a.family)
    n = a.length if a.length is not None else len(_bits_arg(a))
    desc = nonuniform.encode(fam(n))
    _emit(f"length: {n}\nsize: {fam(n).size}\nbits: {len(desc)}\ndescription: {desc}\n", a.out)
    return OK


def cmd_circuit_pipeline(a) -> int:
    fam = nonuniform.get_family(a.family)
    bits = _bits_arg(a)
    got = nonuniform.pipeline_eval(fam, bits)
    want = nonuniform.circuit_eval(fam(len(bits)), bits)
    print(f"pipeline: {got}")
    print(f"circuit: {want}")
    return OK if got == want else REJECTED


def cmd_circuit_compile(a) -> int:
    fam = nonuniform.get_family(a.family)
    g, _ = nonuniform.compile_family_to_proof(fam)
    if a.out:
        Path(a.out).write_text(prooffmt.serialize_proof(g), encoding="utf-8")
    v = checker.classify(g)
    print(f"classification: {v.classification}")
    code = OK if v.accepted else REJECTED
    if a.input is not None:
        bits = _bits_arg(a)
        got = nonuniform.compiled_eval(fam, g, bits)
        want = nonuniform.circuit_eval(fam(len(bits)), bits)
        print(f"compiled: {got}")
        print(f"circuit: {want}")
        if got != want:
            code = REJECTED
    elif not a.out:
        sys.stdout.write(prooffmt.serialize_proof(g))
    return code


COMMANDS = {
    "check": cmd_check,
    "eval": cmd_eval,
    "translate": cmd_translate,
    "bound": cmd_bound,
    "factor": cmd_factor,
    "expand": cmd_expand,
    "circuit-encode": cmd_circuit_encode,
    "circuit-pipeline": cmd_circuit_pipeline,
    "circuit-compile": cmd_circuit_compile,
}


def _nat(text: str) -> int:
    if not text.isdigit():
        raise argparse.ArgumentTypeError(f"not a decimal natural: {text!r}")
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cyclicbc", description="Check, evaluate and compile cyclic safe-recursion proofs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def proof_cmd(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("proof", help="proof file (.cbp)")
        return p

    proof_cmd("check", "classify a proof graph")
    p = proof_cmd("eval", "evaluate a proof graph at its root")
    p.add_argument("--normal", default="", help="comma-separated normal arguments")
    p.add_argument("--safe", default="", help="comma-separated safe arguments")
    p.add_argument("--fuel", type=_nat, default=evaluator.DEFAULT_FUEL)
    p.add_argument("--oracle", action="append", help="name=path or name=builtin:NAME")
    p = proof_cmd("translate", "translate an accepted proof graph to a term")
    p.add_argument("-o", "--out")
    proof_cmd("bound", "bounding polynomial of a proof's translation (or of a .term file)")
    p = proof_cmd("factor", "replace rule-free subtrees by oracle leaves")
    p.add_argument("-o", "--out")
    p = sub.add_parser("expand", help="unfold a length relation into a finite proof")
    p.add_argument("--oracle", action="append", help="name=path or name=builtin:NAME")
    p.add_argument("--depth", type=_nat, default=8)
    p.add_argument("--arity", type=_nat)
    p.add_argument("-o", "--out")
    for name, help in (
        ("circuit-encode", "print the description of C_n"),
        ("circuit-pipeline", "run the advice pipeline on one input"),
        ("circuit-compile", "compile a family's description builder to a proof graph"),
    ):
        p = sub.add_parser(name, help=help)
        p.add_argument("--family", required=True, help="parity, majority, constant-0, constant-1 or a directory")
        p.add_argument("--input", help="input bits")
        p.add_argument("-o", "--out")
        if name == "circuit-encode":
            p.add_argument("--length", type=_nat)
    return ap


def run(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return COMMANDS[a.command](a)
    except evaluator.FuelExhausted as e:
        print(f"error: {e}", file=sys.stderr)
        return FUEL
    except (translator.ClassificationError, translator.NotCycleNormal, checker.NotProgressing) as e:
        print(f"rejected: {e}", file=sys.stderr)
        return REJECTED
    except nonuniform.DecodeError as e:
        print(f"error: {e}", file=sys.stderr)
        return REJECTED
    except (UsageError, OSError, ValueError, KeyError, evaluator.EvalError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
