#!/usr/bin/env python3
# Copyright 2026 The uqwiz Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes tests/fixtures/tiny*.uwm with struct and prints the forward pass.

The writer follows the documented .uwm layout byte by byte and shares no
code with the C++ serializer. The printed outputs are frozen into
tests/persist_test.cc.
"""
import math
import pathlib
import struct

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "tiny.uwm"

W1 = [[0.5, -0.25], [1.0, 0.75], [-0.5, 0.125]]
B1 = [0.1, -0.2, 0.3]
RATE = 0.25
W2 = [[1.5, -1.0, 0.25], [-0.75, 0.5, 2.0]]
B2 = [0.05, -0.05]
INPUTS = [[0.5, -1.0], [2.0, 0.25]]


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def dense(w, b, x):
    return [sum(wi * xi for wi, xi in zip(row, x)) + bi for row, bi in zip(w, b)]


def softmax(z):
    m = max(z)
    e = [math.exp(v - m) for v in z]
    s = sum(e)
    return [v / s for v in e]


def main():
    header = struct.pack("<I", 5)
    header += struct.pack("<BII", 0, 2, 3)
    header += struct.pack("<B", 1)
    header += struct.pack("<Bd", 3, RATE)
    header += struct.pack("<BII", 0, 3, 2)
    header += struct.pack("<B", 2)
    payload = b""
    for w, b in ((W1, B1), (W2, B2)):
        payload += struct.pack("<%dd" % (len(w) * len(w[0])), *[v for row in w for v in row])
        payload += struct.pack("<%dd" % len(b), *b)
    body = header + payload
    blob = b"UWMODEL1" + body + struct.pack("<Q", fnv1a64(body))
    OUT.write_bytes(blob)
    print("bytes:", len(blob))

    # Damaged copies: one flipped payload bit, a cut-off trailer, and an
    # unknown layer tag with a matching checksum.
    flipped = bytearray(blob)
    flipped[8 + len(header) + 3] ^= 0x10
    (OUT.parent / "tiny_flipped.uwm").write_bytes(bytes(flipped))
    (OUT.parent / "tiny_truncated.uwm").write_bytes(blob[:-5])
    bad_body = bytearray(body)
    bad_body[4 + 9] = 7
    (OUT.parent / "tiny_badtag.uwm").write_bytes(
        b"UWMODEL1" + bytes(bad_body) + struct.pack("<Q", fnv1a64(bytes(bad_body))))
    for x in INPUTS:
        h = [max(0.0, v) for v in dense(W1, B1, x)]
        print([repr(v) for v in softmax(dense(W2, B2, h))])
    print("fnv1a64('') = %#x" % fnv1a64(b""))
    print("fnv1a64('a') = %#x" % fnv1a64(b"a"))
    print("fnv1a64('foobar') = %#x" % fnv1a64(b"foobar"))


if __name__ == "__main__":
    main()
