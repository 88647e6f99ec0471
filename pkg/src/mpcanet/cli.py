"""Command-line client for the service.

The CLI never runs the pipeline itself: it builds a request, posts it to the
service API, and formats the response. Without ``--server`` the app is
mounted in-process, so no daemon is needed; with it, requests go to a
running instance (paths in requests are then server-local paths).

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numeric failure.
"""

import argparse
import asyncio
import json
import sys

import httpx

EXIT_BY_KIND = {"usage": 2, "data": 3, "numeric": 4}


def _post_in_process(endpoint: str, payload: dict) -> httpx.Response:
    """Mount the service app in-process and send one request to it."""
    from .service.app import create_app

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://mpcanet.local", timeout=None
        ) as client:
            return await client.post(f"/api/{endpoint}", json=payload)

    return asyncio.run(go())


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _post(args, endpoint: str, payload: dict):
    """Returns (response_json, None) or (None, exit_code)."""
    try:
        if args.server:
            with httpx.Client(base_url=args.server, timeout=None) as client:
                resp = client.post(f"/api/{endpoint}", json=payload)
        else:
            resp = _post_in_process(endpoint, payload)
    except httpx.HTTPError as exc:
        return None, _fail(f"cannot reach service: {exc}", 3)
    body = resp.json()
    if resp.status_code != 200 or "error" in body:
        err = body.get("error", {})
        kind = err.get("kind", "error")
        code = EXIT_BY_KIND.get(kind, 1)
        return None, _fail(f"[{kind}] {err.get('message', resp.text)}", code)
    return body, None


def _load_config(args) -> dict | None:
    if not args.config:
        print("error: --config is required for this command", file=sys.stderr)
        return None
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return None
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return None
    # flags override file values
    if args.seed is not None:
        doc["seed"] = args.seed
    if getattr(args, "splits", None) is not None:
        doc["splits"] = args.splits
    if getattr(args, "ratio", None) is not None:
        doc["ratio"] = args.ratio
    return doc


def _parse_patch_sweep(text: str) -> list:
    out = []
    for part in text.split(","):
        dims = [int(x) for x in part.lower().split("x") if x]
        if not dims:
            raise ValueError(f"bad patch spec {part!r}")
        out.append(dims)
    return out


def _print_json(body: dict) -> None:
    print(json.dumps(body, indent=2))


def cmd_train(args) -> int:
    doc = _load_config(args)
    if doc is None:
        return 2
    payload = {
        "config": doc,
        "data": args.data,
        "model_out": args.model,
        "ratio": args.ratio,
        "seed": args.seed,
    }
    body, code = _post(args, "train", payload)
    if body is None:
        return code
    if args.json:
        _print_json(body)
        return 0
    print(f"feature dim: {body['feature_dim']}  (boxes: {body['box_count']})")
    for layer in body["layers"]:
        print(
            f"  layer {layer['level']}: {layer['kind']}, "
            f"patch {'x'.join(map(str, layer['patch_dims']))}, "
            f"L={layer['filters']}, core dims {'x'.join(map(str, layer['output_dims']))}"
        )
    print(f"trained on {body['trained_on']} samples, labels: {', '.join(body['labels'])}")
    print(f"model written to {body['model_path']}")
    return 0


def cmd_eval(args) -> int:
    body, code = _post(args, "eval", {"model": args.model, "data": args.data})
    if body is None:
        return code
    if args.json:
        _print_json(body)
        return 0
    print(f"accuracy: {body['accuracy']:.4f} on {body['count']} samples")
    labels = body["labels"]
    width = max(len(name) for name in labels)
    print("confusion (rows true, columns predicted):")
    header = " ".join(f"{name:>{width}}" for name in labels)
    print(f"{'':>{width}} {header}")
    for name, row in zip(labels, body["confusion"]):
        cells = " ".join(f"{n:>{width}}" for n in row)
        print(f"{name:>{width}} {cells}")
    return 0


def _bench_csv(body: dict) -> str:
    lines = ["architecture,patch,L,box,split,accuracy"]
    for row in body["rows"]:
        lines.append(
            f"{row['architecture']},{row['patch']},{row['L']},{row['box']},"
            f"{row['split']},{row['accuracy']}"
        )
    for s in body["summary"]:
        lines.append(f"{s['architecture']},{s['patch']},,,mean,{s['mean']}")
    return "\n".join(lines)


def cmd_bench(args) -> int:
    doc = _load_config(args)
    if doc is None:
        return 2
    payload = {
        "config": doc,
        "data": args.data,
        "splits": args.splits if args.splits is not None else doc.get("splits", 5),
        "seed_base": args.seed if args.seed is not None else doc.get("seed", 0),
        "ratio": args.ratio,
    }
    if args.patch_sweep:
        try:
            payload["patch_sweep"] = _parse_patch_sweep(args.patch_sweep)
        except ValueError as exc:
            return _fail(str(exc), 2)
    body, code = _post(args, "bench", payload)
    if body is None:
        return code
    if args.json:
        _print_json(body)
        return 0
    if args.csv:
        print(_bench_csv(body))
        return 0
    for row in body["rows"]:
        print(
            f"{row['architecture']} patch={row['patch']} L={row['L']} box={row['box']} "
            f"split={row['split']}: {row['accuracy']:.4f}"
        )
    for s in body["summary"]:
        print(f"{s['architecture']} patch={s['patch']} mean={s['mean']:.4f} stddev={s['stddev']:.4f}")
    return 0


def cmd_sweep(args) -> int:
    payload = {
        "data": args.data,
        "d_min": args.d_min,
        "d_max": args.d_max,
        "d_step": args.d_step,
        "splits": args.splits if args.splits is not None else 5,
        "seed_base": args.seed if args.seed is not None else 0,
        "ratio": args.ratio if args.ratio is not None else 0.5,
        "energy_q": args.energy_q,
    }
    body, code = _post(args, "sweep-mpca-lda", payload)
    if body is None:
        return code
    if args.json:
        _print_json(body)
        return 0
    if args.csv:
        print("d,split,accuracy,status")
        for row in body["rows"]:
            acc = "" if row["accuracy"] is None else row["accuracy"]
            print(f"{row['d']},{row['split']},{acc},{row['status']}")
        return 0
    for row in body["rows"]:
        if row["status"] == "ok":
            print(f"d={row['d']} split={row['split']}: {row['accuracy']:.4f}")
        else:
            print(f"d={row['d']} split={row['split']}: skipped")
    for p in body["per_d"]:
        if p["mean"] is not None:
            print(f"d={p['d']}: mean {p['mean']:.4f} over {p['splits_ok']} splits")
    if body["best_d"] is not None:
        print(f"best: d={body['best_d']} at {body['best_accuracy']:.4f}")
    return 0


def cmd_synth(args) -> int:
    try:
        dims = [int(x) for x in args.dims.split(",")]
    except ValueError:
        return _fail(f"bad dims {args.dims!r}, expected e.g. 16,16,8", 2)
    payload = {
        "dims": dims,
        "classes": args.classes,
        "per_class": args.per_class,
        "rank": args.rank,
        "sigma": args.sigma,
        "seed": args.seed if args.seed is not None else 0,
        "out_dir": args.out,
    }
    body, code = _post(args, "synth", payload)
    if body is None:
        return code
    if args.json:
        _print_json(body)
        return 0
    print(f"wrote {body['files']} tensors for labels {', '.join(body['labels'])}")
    print(f"manifest: {body['manifest']}")
    return 0


def cmd_inspect(args) -> int:
    body, code = _post(args, "inspect", {"model": args.model})
    if body is None:
        return code
    if args.json:
        _print_json(body)
        return 0
    print(f"architecture: {body['architecture']}")
    print(f"input dims: {'x'.join(map(str, body['input_dims']))}")
    print(f"feature dim: {body['feature_dim']}")
    for layer in body["layers"]:
        print(
            f"layer {layer['level']}: {layer['kind']}, patch "
            f"{'x'.join(map(str, layer['patch_dims']))}, slide modes {layer['slide_modes']}, "
            f"{layer['padding']}, L={layer['filters']}, core dims "
            f"{'x'.join(map(str, layer['output_dims']))}"
        )
        for mode, curve in enumerate(layer.get("energy_curves") or []):
            shown = ", ".join(f"{x:.4f}" for x in curve[:8])
            more = " ..." if len(curve) > 8 else ""
            print(f"    mode {mode} cumulative energy: {shown}{more}")
    pooling = body["pooling"]
    print(
        f"pooling: box {'x'.join(map(str, pooling['box_dims']))}, overlap "
        f"{pooling['overlap']}, strides {pooling['strides']}, normalized {pooling['normalized']}"
    )
    if body["classifier"]:
        print(
            f"classifier: {body['classifier']['kind']} over "
            f"{', '.join(body['classifier']['labels'])}"
        )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpcanet",
        description="Tensor-object feature learning: train, evaluate, benchmark.",
    )
    parser.add_argument("--server", help="service URL (default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, config=False, data=False, model=False, out=False, splits=False):
        if config:
            p.add_argument("--config", help="JSON run config file")
        if data:
            p.add_argument("--data", required=True, help="dataset manifest path")
        if model:
            p.add_argument("--model", required=True, help="model file path")
        if out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        if splits:
            p.add_argument("--splits", type=int, default=None)
            p.add_argument("--ratio", type=float, default=None)
        p.add_argument("--json", action="store_true", help="print the raw JSON response")

    p = sub.add_parser("train", help="train a network + classifier")
    common(p, config=True, data=True, model=True)
    p.add_argument("--ratio", type=float, default=None, help="train on this split only")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a manifest")
    common(p, data=True, model=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="repeated random-split benchmark")
    common(p, config=True, data=True, splits=True)
    p.add_argument("--csv", action="store_true", help="emit CSV rows")
    p.add_argument(
        "--patch-sweep",
        help="comma-separated stage-1 patch sizes, e.g. 3x3x20,5x5x20,7x7x20",
    )
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep-mpca-lda", help="feature-count sweep for the MPCA+LDA baseline")
    common(p, data=True, splits=True)
    p.add_argument("--d-min", type=int, default=10)
    p.add_argument("--d-max", type=int, default=100)
    p.add_argument("--d-step", type=int, default=10)
    p.add_argument("--energy-q", type=float, default=1.0)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    common(p, out=True)
    p.add_argument("--dims", required=True, help="tensor extents, e.g. 16,16,8")
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--sigma", type=float, default=0.05)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("inspect", help="describe a serialized model")
    common(p, model=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
