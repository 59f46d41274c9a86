"""Result-directory layout and deterministic serialization.

Every artifact in a results directory references the run manifest by its
SHA-256, and ``checksums.json`` (written last) pins the content hash of
each file so a report can verify nothing was edited after the run.
Numbers are written as full round-trip decimal text; two runs of the same
configuration produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .ensemble import AggregateSeries, WindowAverage

MANIFEST_NAME = "manifest.json"
CHECKSUMS_NAME = "checksums.json"
AVERAGES_NAME = "window_averages.csv"


def fmt(x) -> str:
    """Decimal text with >= 15 significant digits (17, round-trip exact)."""
    return f"{float(x):.17g}"


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def series_filename(L: int, w_index: int) -> str:
    return f"series_L{L:02d}_w{w_index:02d}.csv"


def write_manifest(out_dir: str, manifest: dict) -> str:
    """Write manifest.json; returns its content hash."""
    os.makedirs(out_dir, exist_ok=True)
    payload = canonical_json(manifest)
    with open(os.path.join(out_dir, MANIFEST_NAME), "wb") as fh:
        fh.write(payload + b"\n")
    return sha256_bytes(payload + b"\n")


def read_manifest(out_dir: str) -> tuple[dict, str]:
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, "rb") as fh:
        raw = fh.read()
    return json.loads(raw), sha256_bytes(raw)


def write_series(
    out_dir: str,
    L: int,
    w_index: int,
    W: float,
    kind: str,
    series: AggregateSeries,
    window: tuple[float, float],
    manifest_hash: str,
) -> str:
    lines = [
        f"# manifest_sha256: {manifest_hash}",
        f"# kind: {kind}",
        f"# L: {L}",
        f"# W: {fmt(W)}",
        f"# window: {fmt(window[0])} {fmt(window[1])}",
        f"# time_kind: {series.time_kind}",
        "t,mean,std,count",
    ]
    for t, m, s in zip(series.times, series.mean, series.std):
        lines.append(f"{fmt(t)},{fmt(m)},{fmt(s)},{series.count}")
    path = os.path.join(out_dir, series_filename(L, w_index))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _parse_header(lines) -> dict:
    meta = {}
    for line in lines:
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition(":")
        meta[key.strip()] = value.strip()
    return meta


def read_series(path: str) -> tuple[AggregateSeries, dict]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    meta = _parse_header(lines)
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    rows = np.array(
        [[float(v) for v in ln.split(",")] for ln in body[1:]], dtype=np.float64
    )
    series = AggregateSeries(
        times=rows[:, 0],
        mean=rows[:, 1],
        std=rows[:, 2],
        count=int(rows[0, 3]) if len(rows) else 0,
        time_kind=meta.get("time_kind", "continuous"),
    )
    return series, meta


def try_read_series(out_dir: str, L: int, w_index: int, manifest_hash: str):
    """Load a persisted point if present and bound to this manifest."""
    path = os.path.join(out_dir, series_filename(L, w_index))
    if not os.path.exists(path):
        return None
    series, meta = read_series(path)
    if meta.get("manifest_sha256") != manifest_hash:
        return None
    return series


def write_window_averages(out_dir: str, averages, manifest_hash: str) -> str:
    lines = [
        f"# manifest_sha256: {manifest_hash}",
        "L,W,value,stderr,count",
    ]
    ordered = sorted(averages, key=lambda wa: (wa.L, wa.W))
    for wa in ordered:
        lines.append(
            f"{wa.L},{fmt(wa.W)},{fmt(wa.value)},{fmt(wa.stderr)},{wa.count}"
        )
    path = os.path.join(out_dir, AVERAGES_NAME)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_window_averages(path: str) -> list[WindowAverage]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    out = []
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    for ln in body[1:]:
        Lv, Wv, value, stderr, count = ln.split(",")
        out.append(
            WindowAverage(
                L=int(Lv),
                W=float(Wv),
                window=(float("nan"), float("nan")),
                value=float(value),
                stderr=float(stderr),
                count=int(count),
            )
        )
    return out


def write_checksums(out_dir: str, manifest_hash: str) -> str:
    """Hash every artifact in the directory; write this file last."""
    files = {}
    for name in sorted(os.listdir(out_dir)):
        if name == CHECKSUMS_NAME:
            continue
        path = os.path.join(out_dir, name)
        if os.path.isfile(path):
            files[name] = sha256_file(path)
    payload = canonical_json({"manifest_sha256": manifest_hash, "files": files})
    path = os.path.join(out_dir, CHECKSUMS_NAME)
    with open(path, "wb") as fh:
        fh.write(payload + b"\n")
    return path


def verify_checksums(out_dir: str) -> list[str]:
    """Names of files that are missing or whose content hash changed."""
    path = os.path.join(out_dir, CHECKSUMS_NAME)
    if not os.path.exists(path):
        return [CHECKSUMS_NAME]
    with open(path) as fh:
        recorded = json.load(fh)
    bad = []
    for name, digest in recorded.get("files", {}).items():
        full = os.path.join(out_dir, name)
        if not os.path.exists(full) or sha256_file(full) != digest:
            bad.append(name)
    return bad


def write_collapse_report(
    out_dir: str,
    result,
    collapsed: np.ndarray,
    manifest_hash: str | None,
    tag: str,
) -> tuple[str, str]:
    """Collapse JSON report plus the master-curve CSV for plotting."""
    os.makedirs(out_dir, exist_ok=True)
    report = {
        "ansatz": result.ansatz,
        "parameters": {k: float(f"{v:.17g}") for k, v in result.params.items()},
        "widths": {k: float(f"{v:.17g}") for k, v in result.widths.items()},
        "R_star": float(f"{result.R_star:.17g}"),
        "n_points": result.n_points,
        "excluded_points": result.excluded_points,
        "settings": result.settings,
        "manifest_sha256": manifest_hash,
    }
    jpath = os.path.join(out_dir, f"collapse_{tag}.json")
    with open(jpath, "wb") as fh:
        fh.write(canonical_json(report) + b"\n")
    lines = ["x_scaled,Q_scaled,L"]
    for x, q, L in collapsed:
        lines.append(f"{fmt(x)},{fmt(q)},{int(L)}")
    cpath = os.path.join(out_dir, f"collapsed_{tag}.csv")
    with open(cpath, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return jpath, cpath
