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
"""Writes tests/fixtures/blobs200.csv and trains a numpy reference network on it.

The network is 2-16-2 (relu, softmax), cross-entropy, plain minibatch SGD
with learning rate 0.05, batch size 32 and 50 epochs. The training accuracy
it reaches is frozen into tests/train_test.cc as the bar the C++ trainer
has to clear.
"""
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
FIXTURE = HERE.parent / "fixtures" / "blobs200.csv"


def make_blobs(rng):
    centers = np.array([[-2.5, -1.0], [2.5, 1.0]])
    labels = np.arange(200) % 2
    points = centers[labels] + rng.normal(scale=0.5, size=(200, 2))
    return points, labels


def train(x, y, rng, epochs=50, batch=32, lr=0.05):
    limit1 = np.sqrt(6.0 / (2 + 16))
    limit2 = np.sqrt(6.0 / (16 + 2))
    w1 = rng.uniform(-limit1, limit1, size=(16, 2))
    b1 = np.zeros(16)
    w2 = rng.uniform(-limit2, limit2, size=(2, 16))
    b2 = np.zeros(2)
    onehot = np.eye(2)[y]
    for _ in range(epochs):
        order = rng.permutation(len(x))
        for start in range(0, len(x), batch):
            idx = order[start:start + batch]
            h_pre = x[idx] @ w1.T + b1
            h = np.maximum(h_pre, 0.0)
            logits = h @ w2.T + b2
            logits -= logits.max(axis=1, keepdims=True)
            p = np.exp(logits)
            p /= p.sum(axis=1, keepdims=True)
            d_logits = (p - onehot[idx]) / len(idx)
            gw2 = d_logits.T @ h
            gb2 = d_logits.sum(axis=0)
            d_h = (d_logits @ w2) * (h_pre > 0)
            gw1 = d_h.T @ x[idx]
            gb1 = d_h.sum(axis=0)
            w1 -= lr * gw1
            b1 -= lr * gb1
            w2 -= lr * gw2
            b2 -= lr * gb2
    h = np.maximum(x @ w1.T + b1, 0.0)
    return float(np.mean(np.argmax(h @ w2.T + b2, axis=1) == y))


def main():
    rng = np.random.default_rng(2026)
    x, y = make_blobs(rng)
    with FIXTURE.open("w") as f:
        f.write("x0,x1,label\n")
        for row, label in zip(x, y):
            f.write(f"{float(row[0])!r},{float(row[1])!r},{int(label)}\n")
    accs = [train(x, y, np.random.default_rng(seed)) for seed in range(10)]
    print("reference training accuracy per seed:", accs)
    print("minimum:", min(accs))


if __name__ == "__main__":
    main()
