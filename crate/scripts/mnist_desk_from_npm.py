#!/usr/bin/env python3
"""Build the desk-scale MNIST IDX files from the `mnist` npm package.

The npm package (MIT) ships 10,000 MNIST digits as JSON arrays of pixel/255
rounded to three decimals. This recovers the byte values, shuffles with a
fixed seed, and writes a 6,000-image training split and a 1,000-image test
split in gzip-compressed IDX format.

usage: npm pack mnist && tar xzf mnist-*.tgz
       python3 scripts/mnist_desk_from_npm.py package/src/digits data/mnist-desk
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path


def write_images(path, images):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main():
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    samples = []
    for digit in range(10):
        data = json.loads((src / f"{digit}.json").read_text())["data"]
        for start in range(0, len(data), 784):
            pixels = [min(255, max(0, round(v * 255))) for v in data[start:start + 784]]
            samples.append((pixels, digit))
    random.Random(20240101).shuffle(samples)
    train, test = samples[:6000], samples[6000:7000]
    dst.mkdir(parents=True, exist_ok=True)
    write_images(dst / "train-images-idx3-ubyte.gz", [s[0] for s in train])
    write_labels(dst / "train-labels-idx1-ubyte.gz", [s[1] for s in train])
    write_images(dst / "t10k-images-idx3-ubyte.gz", [s[0] for s in test])
    write_labels(dst / "t10k-labels-idx1-ubyte.gz", [s[1] for s in test])


if __name__ == "__main__":
    main()
