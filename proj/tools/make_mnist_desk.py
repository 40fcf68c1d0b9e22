#!/usr/bin/env python3
# Copyright 2026 The vclass Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds data/mnist-desk from the 10k MNIST digits bundled in the npm
`mnist` package (v1.1.0, MIT). Pixels are stored there as round(p/255, 3),
which maps back to the original u8 values exactly.

Usage: npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
       python3 tools/make_mnist_desk.py package/src/digits data/mnist-desk
"""
import argparse
import gzip
import json
import pathlib
import struct

import numpy as np

TEST_FRACTION = 0.2
SEED = 20231016


def write_idx(path, magic, dims, payload):
    header = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in dims)
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header + payload)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    args = ap.parse_args()

    images, labels = [], []
    for d in range(10):
        flat = np.asarray(json.load(open(pathlib.Path(args.digits_dir) / f"{d}.json"))["data"])
        px = np.rint(flat * 255.0).astype(np.uint8).reshape(-1, 28, 28)
        images.append(px)
        labels.append(np.full(len(px), d, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)

    order = np.random.default_rng(SEED).permutation(len(labels))
    images, labels = images[order], labels[order]
    n_test = int(round(len(labels) * TEST_FRACTION))
    splits = {"train": slice(n_test, None), "t10k": slice(0, n_test)}

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, sl in splits.items():
        im, lb = images[sl], labels[sl]
        write_idx(out / f"{name}-images-idx3-ubyte.gz", 0x00000803, [len(lb), 28, 28], im.tobytes())
        write_idx(out / f"{name}-labels-idx1-ubyte.gz", 0x00000801, [len(lb)], lb.tobytes())
        print(name, len(lb), np.bincount(lb, minlength=10).tolist())


if __name__ == "__main__":
    main()
