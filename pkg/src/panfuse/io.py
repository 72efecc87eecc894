"""Flat binary image files with a JSON header sidecar.

A cube at ``foo.bin`` carries its metadata in ``foo.hdr.json``:
width, height, bands, dtype (float32 or float64), band-sequential
interleave, little-endian byte order. Payloads are raw samples in that
layout; float32 payloads widen to double on read.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cube import HyperCube, PanImage
from .errors import HeaderMismatchError, MissingHeaderError, TruncatedPayloadError, UnknownDtypeError

_DTYPES = {"float32": np.dtype("<f4"), "float64": np.dtype("<f8")}


def header_path(path):
    return Path(path).with_suffix(".hdr.json")


def _read_header(path):
    hpath = header_path(path)
    if not hpath.exists():
        raise MissingHeaderError(f"header sidecar not found: {hpath}")
    with open(hpath) as fh:
        header = json.load(fh)
    for key in ("width", "height", "bands", "dtype"):
        if key not in header:
            raise HeaderMismatchError(f"header {hpath} missing field {key!r}")
    if header["dtype"] not in _DTYPES:
        raise UnknownDtypeError(f"unsupported dtype {header['dtype']!r} in {hpath}")
    if header.get("interleave", "band-sequential") != "band-sequential":
        raise HeaderMismatchError(f"unsupported interleave {header.get('interleave')!r}")
    if header.get("byte_order", "little-endian") != "little-endian":
        raise HeaderMismatchError(f"unsupported byte order {header.get('byte_order')!r}")
    return header


def read_cube(path) -> HyperCube:
    header = _read_header(path)
    dtype = _DTYPES[header["dtype"]]
    bands, height, width = header["bands"], header["height"], header["width"]
    expected = bands * height * width
    payload = np.fromfile(path, dtype=dtype)
    if payload.size < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {payload.size} samples, header claims {expected}"
        )
    if payload.size > expected:
        raise HeaderMismatchError(
            f"{path}: payload has {payload.size} samples, header claims {expected}"
        )
    return HyperCube(payload.astype(np.float64).reshape(bands, height, width))


def write_cube(cube: HyperCube, path, dtype="float64"):
    if dtype not in _DTYPES:
        raise UnknownDtypeError(f"unsupported dtype {dtype!r}")
    cube.data.astype(_DTYPES[dtype]).tofile(path)
    header = {
        "width": cube.width,
        "height": cube.height,
        "bands": cube.bands,
        "dtype": dtype,
        "interleave": "band-sequential",
        "byte_order": "little-endian",
    }
    with open(header_path(path), "w") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")


def read_pan(path) -> PanImage:
    cube = read_cube(path)
    if cube.bands != 1:
        raise HeaderMismatchError(f"{path}: expected a single-band image, got {cube.bands} bands")
    return PanImage(cube.data[0])


def write_pan(p: PanImage, path, dtype="float64"):
    write_cube(HyperCube(p.data[None]), path, dtype)
