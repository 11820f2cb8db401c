"""
Command-line entry point. Every subcommand prints one JSON document on
standard output; logs go to stderr and to the rotating log file.
"""
import argparse
import json
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv

load_dotenv(".env.local")
load_dotenv(".env")

from action import (
    FormalBV, act_dual, act_dual_renormalized, act_multiple, act_multiple_renormalized, generalized_context,
    onshell_context,
)
from chain import ChainSpec
from exactmath import ONE, AlgebraSpec, format_rat, parse_rat
from izergin import izergin
from model_context import ContextFactory
from partitions import BetheIndex, ParamSet
from scalar import (
    SELECTORS, default_graded_selector, graded_scalar_product_sum, hc_report, scalar_product_sum,
    scalar_product_sum_renormalized,
)
from superaction import GAMMA_PROFILES, graded_act_dual, graded_act_multiple, graded_onshell_context
from verify_runner import SUITE_ORDER, VerifyRunner, register_chain_checks

logger = logging.getLogger("bethe")

CONTEXT_MODES = ("free", "on-shell", "generalized")


def configure_logging():
    if logger.handlers:
        return
    log_dir = os.getenv("BETHE_LOG_DIR", "logs")
    os.makedirs(log_dir, exist_ok=True)

    logging.basicConfig(level=logging.WARNING)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    file_handler = RotatingFileHandler(os.path.join(log_dir, "bethe.log"),
                                       maxBytes=1024 * 1024 * 10, backupCount=5)
    file_handler.setFormatter(logging.Formatter(
        '%(asctime)s %(levelname)s [%(name)s]: %(message)s [in %(pathname)s:%(lineno)d]'))
    file_handler.setLevel(logging.DEBUG)
    logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s: %(message)s'))
    console_handler.setLevel(os.getenv("BETHE_LOG_LEVEL", "WARNING").upper())
    logger.addHandler(console_handler)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def parse_values(text: str) -> List:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError(f"Expected a JSON array, got {text!r}")
    return list(ParamSet.from_json(data))


def parse_index(text: str) -> BetheIndex:
    """A JSON array of levels; a flat array is read as a single level."""
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError(f"Expected a JSON array of levels, got {text!r}")
    if data and not all(isinstance(level, list) for level in data):
        data = [data]
    return BetheIndex(tuple(ParamSet.from_json(level) for level in data))


def _spec_for(args, index: BetheIndex) -> AlgebraSpec:
    if args.graded:
        spec = AlgebraSpec.parse(args.graded)
    else:
        spec = AlgebraSpec.gl((args.N if args.N is not None else index.N) + 1)
    index.check_algebra(spec)
    return spec


def _context(args, spec: AlgebraSpec, t: BetheIndex):
    """Free context, made on-shell for t or with alpha vanishing on t as --mode asks."""
    ctx = ContextFactory.get_context("free", spec, seed=args.seed, c=args.c, gamma_profile=args.gamma_profile)
    if args.mode == "on-shell":
        return graded_onshell_context(ctx, t) if spec.is_graded else onshell_context(ctx, t)
    if args.mode == "generalized":
        return generalized_context(ctx, t)
    return ctx


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--c", type=parse_rat, default=ONE, help="the constant c (rational, nonzero)")
    common.add_argument("--seed", type=int, default=int(os.getenv("BETHE_DEFAULT_SEED", "0")))
    common.add_argument("--graded", default=None, help="superalgebra gl(m|n) given as m,n")
    common.add_argument("--json-indent", type=int, default=None)
    common.add_argument("--gamma-profile", choices=GAMMA_PROFILES, default="standard",
                        help="gamma profile of the graded kernels")

    parser = argparse.ArgumentParser(prog="bethe", description="Exact Bethe-ansatz action formulas and identities")
    sub = parser.add_subparsers(dest="command", required=True)

    hc = sub.add_parser("hc", parents=[common], help="highest coefficient Z(x|t)")
    hc.add_argument("--N", type=int, default=None)
    hc.add_argument("--x", required=True)
    hc.add_argument("--t", required=True)
    hc.add_argument("--selector", choices=SELECTORS, default=None)

    action = sub.add_parser("action", parents=[common], help="T_ij(zbar) on a Bethe vector")
    action.add_argument("--N", type=int, default=None)
    action.add_argument("--i", type=int, required=True)
    action.add_argument("--j", type=int, required=True)
    action.add_argument("--z", required=True)
    action.add_argument("--t", required=True)
    action.add_argument("--dual", action="store_true", help="act on the dual vector from the right")
    action.add_argument("--renormalized", action="store_true")
    action.add_argument("--mode", choices=CONTEXT_MODES, default="free",
                        help="model: free, on-shell for --t, or alpha vanishing on --t")

    sumformula = sub.add_parser("sumformula", parents=[common], help="scalar product by the sum formula")
    sumformula.add_argument("--N", type=int, default=None)
    sumformula.add_argument("--x", required=True)
    sumformula.add_argument("--t", required=True)
    sumformula.add_argument("--selector", choices=SELECTORS, default=None)
    sumformula.add_argument("--renormalized", action="store_true")
    sumformula.add_argument("--mode", choices=CONTEXT_MODES, default="free",
                            help="model: free, on-shell for --t, or alpha vanishing on --t")

    izergin_cmd = sub.add_parser("izergin", parents=[common], help="Izergin determinant K(y|x)")
    izergin_cmd.add_argument("--y", required=True)
    izergin_cmd.add_argument("--x", required=True)
    izergin_cmd.add_argument("--parity", type=int, choices=(0, 1), default=0)

    oracle = sub.add_parser("chain-oracle", parents=[common], help="engine against an explicit spin chain")
    oracle.add_argument("--algebra", default="2,0", help="m,n of the chain algebra")
    oracle.add_argument("--sites", type=int, default=2)
    oracle.add_argument("--xi", default=None, help="JSON array of inhomogeneities")
    oracle.add_argument("--kappa", default=None, help="JSON array of twist values")

    verify = sub.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("--suite", choices=SUITE_ORDER + ("all",), default="all")
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_hc(args) -> Dict:
    x, t = parse_index(args.x), parse_index(args.t)
    spec = _spec_for(args, x)
    t.check_algebra(spec)
    selector = args.selector or (default_graded_selector(spec) if spec.is_graded else "first-level")
    return hc_report(x, t, selector, args.c, spec, args.gamma_profile)


def cmd_action(args) -> Dict:
    t = parse_index(args.t)
    zbar = parse_values(args.z)
    spec = _spec_for(args, t)
    ctx = _context(args, spec, t)
    B = FormalBV(t)
    if spec.is_graded:
        if args.renormalized:
            raise ValueError("Renormalized actions are defined for gl(N+1) only")
        if args.dual:
            result = graded_act_dual(ctx, args.i, args.j, zbar, B.dual())
        else:
            result = graded_act_multiple(ctx, args.i, args.j, zbar, B)
    elif args.dual:
        fn = act_dual_renormalized if args.renormalized else act_dual
        result = fn(ctx, args.i, args.j, zbar, B.dual())
    else:
        fn = act_multiple_renormalized if args.renormalized else act_multiple
        result = fn(ctx, args.i, args.j, zbar, B)
    return {
        "algebra": spec.label(),
        "operator": f"T_{args.i},{args.j}",
        "zbar": [format_rat(z) for z in zbar],
        "vector": str(B.dual() if args.dual else B),
        "context": ctx.to_dict(),
        "result": result.to_dict(),
    }


def cmd_sumformula(args) -> Dict:
    x, t = parse_index(args.x), parse_index(args.t)
    spec = _spec_for(args, x)
    t.check_algebra(spec)
    ctx = _context(args, spec, t)
    if spec.is_graded:
        if args.renormalized:
            raise ValueError("Renormalized sum formula is defined for gl(N+1) only")
        value = graded_scalar_product_sum(ctx, x, t, args.selector)
    elif args.renormalized:
        value = scalar_product_sum_renormalized(ctx, x, t, args.selector or "first-level")
    else:
        value = scalar_product_sum(ctx, x, t, args.selector or "first-level")
    return {"algebra": spec.label(), "context": ctx.to_dict(), "S": format_rat(value)}


def cmd_izergin(args) -> Dict:
    return {"K": format_rat(izergin(parse_values(args.y), parse_values(args.x), args.parity, args.c))}


def cmd_chain_oracle(args):
    spec = AlgebraSpec.parse(args.algebra)
    kappa = parse_values(args.kappa) if args.kappa else None
    if args.xi:
        xi = parse_values(args.xi)
        chain = ChainSpec(spec, tuple(xi), tuple(kappa or [ONE] * (spec.N + 1)), args.c)
    else:
        chain = ChainSpec.build(spec, args.sites, args.seed, args.c, kappa)
    runner = VerifyRunner(seed=args.seed, c=args.c)
    register_chain_checks(runner, chain)
    return runner.execute("chain-oracle")


def cmd_verify(args):
    return VerifyRunner(seed=args.seed, c=args.c).run_suite(args.suite)


COMMANDS = {
    "hc": cmd_hc,
    "action": cmd_action,
    "sumformula": cmd_sumformula,
    "izergin": cmd_izergin,
    "chain-oracle": cmd_chain_oracle,
    "verify": cmd_verify,
}


def emit(payload: Dict, indent: Optional[int]):
    sys.stdout.write(json.dumps(payload, indent=indent) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    logger.debug(f"Running {args.command} with {vars(args)}")
    try:
        result = COMMANDS[args.command](args)
    except ValueError as e:
        logger.error(f"{args.command} failed: {e}")
        emit({"error": str(e)}, args.json_indent)
        return 2
    if isinstance(result, dict):
        emit(result, args.json_indent)
        return 0
    emit(result.to_dict(), args.json_indent)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
