"""Command-line driver.

Exit codes: 0 success or agreement, 1 validation failure, 2 parse failure,
3 cap exceeded, 4 oracle mismatch.  Every flag can also be set through an
environment variable CROSSMOD_<FLAG>, e.g. CROSSMOD_CAP_DENSE=2048.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .algebra import validate_crossed_module
from .complexes import (free_reduce, rp2_generator, tetrahedron_sphere_words,
                        validate_complex)
from .configuration import DEFAULT_STATE_CAP, enumerate_fake_flat, path_product, sphere_product
from .errors import CapExceeded, MalformedWord, ParseError, StructureError, WeightError
from .hamiltonian import DENSE_CAP, MODEL_GAUGE, MODEL_TERMS, StateBasis, solve_model
from .io import (config_to_json, dump, load_complex, load_module, load_weights,
                 sphere_from_json, spectrum_to_csv, spectrum_to_json)
from .oracle import MODELS, ground_count

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_CAP, EXIT_MISMATCH = 0, 1, 2, 3, 4
ENV_PREFIX = "CROSSMOD_"

log = logging.getLogger("crossmod")

NAMED_SPHERES = {
    "generator": lambda: rp2_generator(),
    "sigma": lambda: tetrahedron_sphere_words()[0],
    "sigma_prime": lambda: tetrahedron_sphere_words()[1],
}


def _env(flag: str, default=None):
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"), default)


def _emit(obj, out: str | None) -> None:
    text = dump(obj, out)
    if out is None:
        print(text)


def _parse_json_arg(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as ex:
        raise ParseError(f"{what}: invalid JSON ({ex.msg})") from None


def _sphere(ref: str):
    if ref in NAMED_SPHERES:
        return NAMED_SPHERES[ref]()
    return sphere_from_json(_parse_json_arg(ref, "sphere"))


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    if not args.module and not args.complex:
        raise ParseError("validate needs --module and/or --complex")
    report, ok = {}, True
    if args.module:
        r = validate_crossed_module(load_module(args.module))
        report["module"] = r.to_dict()
        ok &= r.ok
    if args.complex:
        r = validate_complex(load_complex(args.complex))
        report["complex"] = r.to_dict()
        ok &= r.ok
    report["ok"] = bool(ok)
    _emit(report, args.out)
    return EXIT_OK if ok else EXIT_INVALID


def _checked_inputs(args):
    cm, X = load_module(args.module), load_complex(args.complex)
    problems = validate_crossed_module(cm).to_dict()["violations"] + \
        validate_complex(X).to_dict()["violations"]
    if problems:
        raise StructureError("invalid input: " + ", ".join(p["axiom"] for p in problems))
    return cm, X


def cmd_enumerate(args) -> int:
    cm, X = _checked_inputs(args)
    configs = enumerate_fake_flat(cm, X, args.cap_states)
    report = {"module": cm.name, "complex": X.name, "count": len(configs)}
    if args.dump:
        report["configurations"] = [config_to_json(c) for c in configs]
    _emit(report, args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cm, X = _checked_inputs(args)
    model = args.model
    if model in MODEL_TERMS:
        terms = MODEL_TERMS[model]
    elif set(model) <= set("ABVW"):
        terms = model
    else:
        raise ParseError(f"model must be one of {sorted(MODEL_TERMS)} or a subset of ABVW")
    gauge = args.gauge or MODEL_GAUGE.get(model, "ker")
    weights = load_weights(cm, args.weights)
    result = solve_model(cm, X, model, weights, terms, gauge, args.cap_states,
                         args.cap_dense, args.threads)
    oracle = None
    if model in MODELS and args.weights in (None, "canonical") and args.gauge in (None, MODEL_GAUGE[model]):
        oracle = ground_count(X, cm, model).count
    report = spectrum_to_json(result, oracle)
    if args.out:
        base = Path(args.out)
        dump(report, base.with_suffix(".json"))
        base.with_suffix(".csv").write_text(spectrum_to_csv(result))
    else:
        print(dump({k: v for k, v in report.items() if k != "eigenvalues"}))
    if oracle is not None and oracle != result.ground_multiplicity:
        log.error("ground multiplicity %d differs from the oracle prediction %d",
                  result.ground_multiplicity, oracle)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_holonomy(args) -> int:
    cm, X = _checked_inputs(args)
    if (args.path is None) == (args.sphere is None):
        raise ParseError("holonomy needs exactly one of --path or --sphere")
    if args.config:
        c = _parse_json_arg(args.config, "config")
        eps = np.array([c["eps"]], dtype=np.int64)
        phi = np.array([c["phi"]], dtype=np.int64)
    else:
        basis = StateBasis(cm, X, args.cap_states)
        eps, phi = basis.eps, basis.phi

    if args.path is not None:
        w = tuple(tuple(x) for x in _parse_json_arg(args.path, "path"))
        if w:
            X.endpoints(w)
        values = path_product(cm.E, eps, w)
        report = {"kind": "path", "values": values.tolist()}
    else:
        sw = _sphere(args.sphere)
        if free_reduce(X.sphere_boundary(sw)):
            raise MalformedWord("sphere word boundary does not reduce to the empty word")
        values = sphere_product(cm, eps, phi, sw)
        report = {"kind": "sphere", "values": values.tolist()}
        if args.compare:
            other = sphere_product(cm, eps, phi, _sphere(args.compare))
            report["equal"] = bool(np.array_equal(values, other))
    report["configurations"] = [{"eps": a, "phi": b} for a, b in zip(eps.tolist(), phi.tolist())]
    _emit(report, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    cm, X = _checked_inputs(args)
    if args.model not in MODELS:
        raise ParseError(f"oracle model must be one of {MODELS}")
    report = ground_count(X, cm, args.model).to_dict()
    report.update(module=cm.name, complex=X.name)
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crossmod", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_both=True):
        sp.add_argument("--module", default=_env("module"),
                        help="catalog name, JSON file or inline JSON")
        sp.add_argument("--complex", default=_env("complex"),
                        help="catalog name (CUBE_L<n> allowed), JSON file or inline JSON")
        sp.add_argument("--out", default=_env("out"), help="output file (stdout when omitted)")
        sp.add_argument("--cap-states", type=int, default=int(_env("cap_states", DEFAULT_STATE_CAP)))
        sp.set_defaults(need_both=need_both)

    v = sub.add_parser("validate", help="check crossed-module axioms and complex structure")
    common(v, need_both=False)
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("enumerate", help="count fake-flat configurations")
    common(e)
    e.add_argument("--dump", action="store_true", help="include every configuration")
    e.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("spectrum", help="exact spectrum on the physical subspace")
    common(s)
    s.add_argument("--model", default=_env("model", "HE"),
                   help="HE, HAW, HM, HBV, full, or a term subset such as ABW")
    s.add_argument("--weights", default=_env("weights"), help="'canonical' or a JSON weight table")
    s.add_argument("--gauge", choices=("ker", "full"), default=_env("gauge"))
    s.add_argument("--cap-dense", type=int, default=int(_env("cap_dense", DENSE_CAP)))
    s.add_argument("--threads", type=int, default=int(_env("threads", 1)))
    s.set_defaults(func=cmd_spectrum)

    h = sub.add_parser("holonomy", help="1- or 2-holonomy over configurations")
    common(h)
    h.add_argument("--path", help="JSON list of [edge, sign]")
    h.add_argument("--sphere", help="JSON sphere word or one of " + ", ".join(NAMED_SPHERES))
    h.add_argument("--compare", help="second sphere word; reports whether values agree")
    h.add_argument("--config", help="JSON {eps, phi}; every fake-flat configuration when omitted")
    h.set_defaults(func=cmd_holonomy)

    o = sub.add_parser("oracle", help="predicted ground-state degeneracy")
    common(o)
    o.add_argument("--model", default=_env("model", "HE"), choices=MODELS)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return EXIT_OK if ex.code == 0 else EXIT_PARSE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.need_both and not (args.module and args.complex):
            raise ParseError(f"{args.command} needs --module and --complex")
        return args.func(args)
    except ParseError as ex:
        log.error("parse error: %s", ex)
        return EXIT_PARSE
    except CapExceeded as ex:
        log.error("cap exceeded: %s", ex)
        return EXIT_CAP
    except (StructureError, MalformedWord, WeightError, ValueError) as ex:
        log.error("invalid input: %s", ex)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
