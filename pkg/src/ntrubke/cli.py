"""Command-line interface: ``ntrubke {keygen,expand,encrypt,decrypt,demo,bench}``.

Exit codes: 0 success, 1 usage, 2 crypto failure, 3 integrity failure, 4 I/O.
Secrets are never printed; only CRC-32 fingerprints.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import _backend
from .bench import MIN_TRIALS, bench_preset, compare_backends, emit_table
from .cert_scheme import IntegrityFailure, decrypt_bytes, encrypt_bytes
from .key_expansion import (
    ExpandedPublicKey,
    ExpanderRole,
    ExpanderSecret,
    expand_key,
    sample_expander,
)
from .keyfile import (
    KeyFileError,
    dump_ciphertext,
    dump_expander,
    dump_key,
    file_fingerprint,
    load_ciphertext,
    load_key,
)
from .ntru_core import PrivateKey, PublicKey, decrypt, encrypt, keygen
from .poly_ring import PAPER_PRESETS, PRESETS, NotInvertible, ResampleExhausted, RingElement
from .poly_ring import preset as lookup_preset
from .poly_ring import sample_message
from .protocol import FlowError, run_flow

EXIT_OK, EXIT_USAGE, EXIT_CRYPTO, EXIT_INTEGRITY, EXIT_IO = 0, 1, 2, 3, 4
SPEEDUP_FLOOR = 100.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rng(seed):
    return np.random.default_rng(seed)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _write(path, data):
    with open(path, "wb") as fh:
        fh.write(data)


def cmd_keygen(args):
    params = lookup_preset(args.preset)
    rng = _rng(args.seed)
    sk, pk = keygen(params, rng)
    if args.self_test:
        m = sample_message(params, rng)
        if decrypt(sk, encrypt(pk, m, rng)) != m:
            print("self-test failed: roundtrip mismatch", file=sys.stderr)
            return EXIT_CRYPTO
    public_raw = dump_key(pk)
    _write(args.private, dump_key(sk))
    _write(args.public, public_raw)
    print(f"public key fingerprint: {file_fingerprint(public_raw)}")
    if args.self_test:
        print("self-test: ok")
    return EXIT_OK


def _test_expander(kind, params):
    n = params.N
    e = RingElement.one(n) if kind == "identity" else RingElement.monomial(n, 1)
    return ExpanderSecret(e, ExpanderRole.DIRECT)


def cmd_expand(args):
    key = load_key(_read(args.input))
    if not isinstance(key, (PublicKey, ExpandedPublicKey)):
        raise UsageError("expand needs a public or expanded key")
    params = key.params
    if key.depth >= 2:
        raise ValueError("depth-2 keys cannot be expanded further")
    if args.test_expander:
        secret = _test_expander(args.test_expander, params)
    else:
        secret = sample_expander(params, ExpanderRole.DIRECT, _rng(args.seed))
    expanded = expand_key(key, secret, params)
    _write(args.output, dump_key(expanded))
    secret_raw = dump_expander(secret, params)
    if args.keep_secret:
        _write(args.keep_secret, secret_raw)
    print(f"expander fingerprint: {file_fingerprint(secret_raw)}")
    return EXIT_OK


def cmd_encrypt(args):
    key = load_key(_read(args.key))
    if not isinstance(key, (PublicKey, ExpandedPublicKey)):
        raise UsageError("encrypt needs a public or expanded key")
    data = _read(args.input)
    blocks = encrypt_bytes(data, key, key.params, _rng(args.seed))
    _write(args.output, dump_ciphertext(blocks, key.params))
    return EXIT_OK


def cmd_decrypt(args):
    key = load_key(_read(args.key))
    if not isinstance(key, PrivateKey):
        raise UsageError("decrypt needs a private key")
    blocks, params = load_ciphertext(_read(args.input))
    if params != key.params:
        raise UsageError(f"ciphertext is for {params.name}, key is for {key.params.name}")
    _write(args.output, decrypt_bytes(blocks, key, params))
    return EXIT_OK


def cmd_demo(args):
    params = lookup_preset(args.preset)
    transcript = run_flow(args.flow, params, _rng(args.seed))
    sys.stdout.write(transcript.to_text())
    if not transcript.ok:
        failed = [name for name, ok in transcript.invariants.items() if not ok]
        print(f"invariants failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CRYPTO
    return EXIT_OK


def cmd_bench(args):
    if args.trials < MIN_TRIALS:
        raise UsageError(f"--trials must be at least {MIN_TRIALS}")
    names = args.preset or list(PAPER_PRESETS)
    rng = _rng(args.seed)
    reports = []
    for name in names:
        params = lookup_preset(name)
        if args.backend == "both":
            reports.extend(compare_backends(params, args.trials, rng))
        elif args.backend == "auto":
            reports.append(bench_preset(params, args.trials, rng))
        else:
            with _backend.use_backend(args.backend):
                reports.append(bench_preset(params, args.trials, rng))
    table = emit_table(reports, args.format)
    sys.stdout.write(table.decode())
    if args.backend == "both":
        for r in reports:
            print(f"# {r.preset} [{r.backend}] speedup {r.speedup_ratio:.1f}")
    slow = [r for r in reports if r.speedup_ratio < SPEEDUP_FLOOR]
    if slow:
        print(
            "speedup below %.0fx: %s" % (SPEEDUP_FLOOR, ", ".join(r.preset for r in slow)),
            file=sys.stderr,
        )
        return EXIT_CRYPTO
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="ntrubke", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    presets = sorted(PRESETS)

    p = sub.add_parser("keygen", help="generate a key pair")
    p.add_argument("private", help="output private key file")
    p.add_argument("public", help="output public key file")
    p.add_argument("--preset", default="ntru509", choices=presets)
    p.add_argument("--seed", type=int)
    p.add_argument("--self-test", action="store_true", help="roundtrip one message first")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("expand", help="expand a public key with a fresh expander")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--seed", type=int)
    p.add_argument("--keep-secret", metavar="PATH", help="also write the expander secret here")
    p.add_argument("--test-expander", choices=("identity", "shift"), help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_expand)

    for name, func, helptext in (
        ("encrypt", cmd_encrypt, "encrypt a file under a public or expanded key"),
        ("decrypt", cmd_decrypt, "decrypt a file with a private key"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("key")
        p.add_argument("input")
        p.add_argument("output")
        p.add_argument("--seed", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("demo", help="run an issuance flow and print its transcript")
    p.add_argument("--flow", choices=("direct", "butterfly"), default="butterfly")
    p.add_argument("--preset", default="ntru509", choices=presets)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("bench", help="time keygen against key expansion")
    p.add_argument("--preset", action="append", choices=presets)
    p.add_argument("--trials", type=int, default=MIN_TRIALS)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--backend", choices=("auto", "compiled", "python", "both"), default="auto"
    )
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KeyFileError, IntegrityFailure) as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except FlowError as exc:
        code = EXIT_INTEGRITY if isinstance(exc.cause, IntegrityFailure) else EXIT_CRYPTO
        print(f"flow failed at {exc}", file=sys.stderr)
        return code
    except (ResampleExhausted, NotInvertible, ValueError, OverflowError) as exc:
        print(f"crypto failure: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
