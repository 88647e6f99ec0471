"""Orchestration behind the service endpoints (and thus the CLI).

Every function takes plain values, does the work with the core modules, and
returns a JSON-compatible dict. All randomness flows through explicit seeds,
so reruns with the same inputs reproduce outputs bitwise.
"""

import numpy as np

from . import classify
from .config import RunConfig, effective_config, resolve_layers, resolve_pooling
from .data import Dataset, SynthSpec, load_dataset, split_dataset, synth_generate, write_dataset
from .errors import ConfigError, DataError
from .mpca import EnergyPolicy, compute_variance_order, fit_mpca, project_batch
from .model_io import load_model, save_model
from .network import Network, forward, plan_geometry, train_network


def _nonempty(ds: Dataset, manifest) -> Dataset:
    if len(ds) == 0:
        raise DataError(f"dataset {manifest} is empty")
    return ds


def _check_ratio(ratio) -> None:
    if ratio is not None and not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")


def _features(net: Network, tensors) -> np.ndarray:
    return np.stack([forward(net, t) for t in tensors])


def _fit_classifier(config: RunConfig, features, labels, label_names):
    if config.classifier.kind == "nn1":
        return classify.fit_nearest_neighbor(features, labels, label_names)
    return classify.fit_ridge_ovr(
        features, labels, config.classifier.ridge_lambda, label_names
    )


def _train_once(config: RunConfig, ds: Dataset):
    layer_cfgs = resolve_layers(config, ds.dims)
    pooling = resolve_pooling(config)
    plan = plan_geometry(ds.dims, layer_cfgs, pooling)
    try:
        net = train_network(ds.tensors, config.architecture, layer_cfgs, pooling)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    features = _features(net, ds.tensors)
    clf = _fit_classifier(config, features, ds.labels, ds.label_names)
    return net, clf, plan


def _layer_infos(net: Network) -> list:
    out = []
    for level, layer in enumerate(net.layers):
        m = layer.model
        out.append(
            {
                "level": level + 1,
                "kind": layer.config.dictionary_kind,
                "patch_dims": list(layer.config.geometry.patch_dims),
                "slide_modes": list(layer.config.geometry.slide_modes),
                "padding": layer.config.geometry.padding,
                "filters": layer.config.filters,
                "input_dims": list(m.input_dims),
                "output_dims": list(m.output_dims),
            }
        )
    return out


def train_run(config: RunConfig, data, model_out, ratio=None, seed=None) -> dict:
    """Train a network plus classifier and serialize them to ``model_out``."""
    _check_ratio(ratio)
    ds = _nonempty(load_dataset(data), data)
    if ratio is not None:
        split_seed = config.seed if seed is None else seed
        train_idx, _ = split_dataset(ds, ratio, split_seed)
        ds = ds.subset(train_idx)
    net, clf, plan = _train_once(config, ds)
    save_model(model_out, net, clf)
    return {
        "feature_dim": plan.feature_dim,
        "box_count": plan.box_count,
        "layers": _layer_infos(net),
        "model_path": str(model_out),
        "trained_on": len(ds),
        "labels": list(ds.label_names),
        "config": effective_config(config),
    }


def _map_labels(ds: Dataset, class_labels) -> np.ndarray:
    lookup = {name: i for i, name in enumerate(class_labels)}
    mapped = []
    for idx in ds.labels:
        name = ds.label_names[int(idx)]
        if name not in lookup:
            raise DataError(f"label {name!r} is unknown to the model")
        mapped.append(lookup[name])
    return np.asarray(mapped, dtype=np.int64)


def eval_run(model_path, data) -> dict:
    """Evaluate a serialized model on a manifest; accuracy plus confusion."""
    net, clf = load_model(model_path)
    if clf is None:
        raise DataError(f"model {model_path} carries no classifier")
    ds = _nonempty(load_dataset(data), data)
    if tuple(ds.dims) != tuple(net.input_dims):
        raise DataError(
            f"dataset dims {tuple(ds.dims)} do not match model dims {tuple(net.input_dims)}"
        )
    true = _map_labels(ds, clf.class_labels)
    pred = classify.predict(clf, _features(net, ds.tensors))
    accuracy, confusion = classify.evaluate(pred, true, len(clf.class_labels))
    return {
        "accuracy": accuracy,
        "confusion": confusion.tolist(),
        "labels": list(clf.class_labels),
        "count": len(ds),
    }


def _patch_label(dims) -> str:
    return "x".join(str(d) for d in dims)


def bench_run(config: RunConfig, data, splits, seed_base, ratio=None, patch_sweep=None) -> dict:
    """Train/evaluate over repeated random splits, optionally sweeping the
    first layer's patch size; per-split rows plus mean and stddev."""
    if splits < 1:
        raise ConfigError("splits must be >= 1")
    _check_ratio(ratio)
    ds = _nonempty(load_dataset(data), data)
    ratio = config.ratio if ratio is None else ratio

    variants = []
    if patch_sweep:
        for dims in patch_sweep:
            doc = config.model_dump(by_alias=True)
            doc["layers"][0]["patch_dims"] = [int(d) for d in dims]
            try:
                variants.append(RunConfig.model_validate(doc))
            except Exception as exc:
                raise ConfigError(f"invalid patch sweep entry {dims}: {exc}") from exc
    else:
        variants.append(config)

    rows = []
    summary = []
    for variant in variants:
        patch = _patch_label(variant.layers[0].patch_dims)
        filters = "-".join(str(s.filters) for s in variant.layers)
        box = _patch_label(variant.pooling.resolved_box_dims())
        accuracies = []
        for s in range(splits):
            split_seed = seed_base + s
            train_idx, test_idx = split_dataset(ds, ratio, split_seed)
            train_ds = ds.subset(train_idx)
            test_ds = ds.subset(test_idx)
            net, clf, _ = _train_once(variant, train_ds)
            true = _map_labels(test_ds, clf.class_labels)
            pred = classify.predict(clf, _features(net, test_ds.tensors))
            accuracy, _ = classify.evaluate(pred, true, len(clf.class_labels))
            accuracies.append(accuracy)
            rows.append(
                {
                    "architecture": variant.architecture,
                    "patch": patch,
                    "L": filters,
                    "box": box,
                    "split": s,
                    "accuracy": accuracy,
                }
            )
        acc = np.asarray(accuracies)
        summary.append(
            {
                "architecture": variant.architecture,
                "patch": patch,
                "mean": float(acc.mean()),
                "stddev": float(acc.std()),
            }
        )
    return {
        "rows": rows,
        "summary": summary,
        "splits": splits,
        "ratio": ratio,
        "seed_base": seed_base,
        "config": effective_config(config),
    }


def sweep_mpca_lda_run(
    data,
    d_min=10,
    d_max=100,
    d_step=10,
    splits=5,
    seed_base=0,
    ratio=0.5,
    energy_q=1.0,
) -> dict:
    """Feature-count sweep for the MPCA+LDA baseline on whole tensors.

    Per split: fit MPCA on the training tensors, order core coordinates by
    variance, then for each d truncate to the d strongest coordinates, fit
    LDA, and score the test half. Values of d beyond the available
    coordinates produce 'skipped' rows.
    """
    if d_min < 1 or d_max < d_min or d_step < 1:
        raise ConfigError("need 1 <= d_min <= d_max and d_step >= 1")
    if splits < 1:
        raise ConfigError("splits must be >= 1")
    _check_ratio(ratio)
    ds = _nonempty(load_dataset(data), data)
    num_classes = len(ds.label_names)
    if num_classes < 2:
        raise DataError("need at least 2 classes")
    d_values = list(range(d_min, d_max + 1, d_step))

    rows = []
    for s in range(splits):
        train_idx, test_idx = split_dataset(ds, ratio, seed_base + s)
        train_ds = ds.subset(train_idx)
        test_ds = ds.subset(test_idx)

        model = fit_mpca(train_ds.tensors, EnergyPolicy(q=energy_q))
        compute_variance_order(model, train_ds.tensors)
        order = model.variance_order
        train_flat = project_batch(model, np.stack(train_ds.tensors)).reshape(
            len(train_ds), -1
        )[:, order]
        test_flat = project_batch(model, np.stack(test_ds.tensors)).reshape(
            len(test_ds), -1
        )[:, order]
        available = train_flat.shape[1]

        for d in d_values:
            if d > available:
                rows.append({"d": d, "split": s, "accuracy": None, "status": "skipped"})
                continue
            directions = min(num_classes - 1, d)
            try:
                lda = classify.fit_lda(
                    train_flat[:, :d], train_ds.labels, directions, ds.label_names
                )
            except ValueError as exc:
                raise DataError(str(exc)) from exc
            pred = classify.predict(lda, test_flat[:, :d])
            accuracy, _ = classify.evaluate(pred, test_ds.labels, num_classes)
            rows.append({"d": d, "split": s, "accuracy": accuracy, "status": "ok"})

    per_d = []
    for d in d_values:
        accs = [r["accuracy"] for r in rows if r["d"] == d and r["status"] == "ok"]
        per_d.append(
            {
                "d": d,
                "mean": float(np.mean(accs)) if accs else None,
                "splits_ok": len(accs),
            }
        )
    scored = [p for p in per_d if p["mean"] is not None]
    best = max(scored, key=lambda p: p["mean"]) if scored else None
    return {
        "rows": rows,
        "per_d": per_d,
        "best_d": best["d"] if best else None,
        "best_accuracy": best["mean"] if best else None,
        "splits": splits,
        "ratio": ratio,
        "seed_base": seed_base,
        "energy_q": energy_q,
    }


def synth_run(dims, num_classes, samples_per_class, rank, sigma, seed, out_dir) -> dict:
    """Generate a synthetic dataset and write it under ``out_dir``."""
    try:
        spec = SynthSpec(
            dims=tuple(dims),
            num_classes=num_classes,
            samples_per_class=samples_per_class,
            template_rank=tuple(rank) if not isinstance(rank, int) else rank,
            noise_sigma=sigma,
            seed=seed,
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    ds = synth_generate(spec)
    manifest = write_dataset(ds, out_dir)
    return {
        "manifest": str(manifest),
        "files": len(ds),
        "labels": list(ds.label_names),
        "dims": list(spec.dims),
        "seed": seed,
    }


def _energy_curves(layer) -> list:
    curves = []
    for ev in layer.model.mode_eigenvalues:
        ev = np.maximum(np.asarray(ev), 0.0)
        total = float(ev.sum())
        if total <= 0.0:
            curves.append([0.0] * len(ev))
        else:
            curves.append([float(x) for x in np.cumsum(ev) / total])
    return curves


def inspect_run(model_path) -> dict:
    """Describe a serialized model: architecture, geometry, spectra, sizes."""
    net, clf = load_model(model_path)
    layers = _layer_infos(net)
    for info, layer in zip(layers, net.layers):
        info["energy_curves"] = _energy_curves(layer)
        info["captured_scatter"] = layer.model.captured_scatter
    return {
        "architecture": net.architecture,
        "input_dims": list(net.input_dims),
        "feature_dim": net.feature_dim,
        "layers": layers,
        "pooling": {
            "box_dims": list(net.pooling.box_dims),
            "overlap": net.pooling.overlap_ratio,
            "strides": list(net.pooling.strides),
            "normalized": net.pooling.normalized,
        },
        "classifier": None
        if clf is None
        else {
            "kind": "nn1" if isinstance(clf, classify.NearestNeighborModel) else "ridge",
            "labels": list(clf.class_labels),
        },
    }
