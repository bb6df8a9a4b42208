# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2026 The splitwire Authors
"""Reader and writer for .swwt weight containers (standard library only).

Training code exports with write(); the C++ engine loads the result with
splitwire::read_weights_file.
"""

import argparse
import array
import json
import struct
import sys

MAGIC = b"SWWT"
VERSION = 1


def write(path, tensors):
    """tensors: iterable of (name, shape, flat float values)."""
    manifest = []
    blobs = []
    offset = 0
    seen = set()
    for name, shape, values in tensors:
        if name in seen:
            raise ValueError("duplicate tensor name %r" % name)
        seen.add(name)
        count = 1
        for d in shape:
            count *= d
        data = array.array("f", values)
        if len(data) != count:
            raise ValueError("tensor %r: %d values for shape %r" % (name, len(data), shape))
        if sys.byteorder != "little":
            data.byteswap()
        raw = data.tobytes()
        manifest.append({"name": name, "dtype": "f32", "shape": list(shape),
                         "offset": offset, "byte_length": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    text = json.dumps(manifest, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HI", VERSION, len(text)))
        f.write(text)
        for raw in blobs:
            f.write(raw)


def read(path):
    with open(path, "rb") as f:
        buf = f.read()
    if len(buf) < 10 or buf[:4] != MAGIC:
        raise ValueError("not a weight container")
    version, mlen = struct.unpack_from("<HI", buf, 4)
    if version != VERSION:
        raise ValueError("unsupported version %d" % version)
    manifest = json.loads(buf[10:10 + mlen].decode("utf-8"))
    blob = buf[10 + mlen:]
    out = []
    for e in manifest:
        data = array.array("f")
        data.frombytes(blob[e["offset"]:e["offset"] + e["byte_length"]])
        if sys.byteorder != "little":
            data.byteswap()
        out.append((e["name"], tuple(e["shape"]), data.tolist()))
    return out


def demo_tensors():
    # Deterministic values that are exact in binary32.
    yield "stem.weight", (2, 3, 1, 1), [i * 0.25 - 0.75 for i in range(6)]
    yield "stem.bias", (2,), [1.5, -2.0]
    yield "head.scale", (), [3.0]
    yield "empty", (0, 4), []


def main():
    p = argparse.ArgumentParser(description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)
    d = sub.add_parser("demo", help="write a small fixed container")
    d.add_argument("path")
    s = sub.add_parser("show", help="list tensors in a container")
    s.add_argument("path")
    args = p.parse_args()
    if args.cmd == "demo":
        write(args.path, demo_tensors())
    else:
        for name, shape, values in read(args.path):
            print("%s %s %d" % (name, list(shape), len(values)))


if __name__ == "__main__":
    main()
