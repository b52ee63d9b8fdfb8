"""Minimal dense networks with manual backprop, and Adam.

Everything is float64 numpy so that analytic gradients can be checked tightly
against central finite differences.
"""

from __future__ import annotations

import numpy as np


def orthogonal(rng, shape, gain):
    a = rng.standard_normal(shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return gain * q[:shape[0], :shape[1]]


class MLP:
    """Fully connected net: tanh hidden layers, linear output."""

    def __init__(self, sizes, rng, out_gain=1.0):
        self.sizes = list(sizes)
        self.W = []
        self.b = []
        for i, (n_in, n_out) in enumerate(zip(sizes, sizes[1:])):
            last = i == len(sizes) - 2
            gain = out_gain if last else np.sqrt(2.0)
            self.W.append(orthogonal(rng, (n_in, n_out), gain))
            self.b.append(np.zeros(n_out))

    @property
    def params(self):
        out = []
        for w, b in zip(self.W, self.b):
            out.extend([w, b])
        return out

    def set_params(self, arrays):
        k = 0
        for i in range(len(self.W)):
            self.W[i] = np.array(arrays[k], dtype=float)
            self.b[i] = np.array(arrays[k + 1], dtype=float)
            k += 2

    def forward(self, x):
        """Returns (output, cache).  x has shape (batch, n_in)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        acts = [x]
        h = x
        for i in range(len(self.W) - 1):
            h = np.tanh(h @ self.W[i] + self.b[i])
            acts.append(h)
        out = h @ self.W[-1] + self.b[-1]
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite values in forward pass")
        return out, acts

    def backward(self, acts, dout):
        """Gradients of a scalar loss given d(loss)/d(output).

        Returns a flat list matching ``params`` order.
        """
        grads_W = [None] * len(self.W)
        grads_b = [None] * len(self.b)
        dh = dout
        for i in range(len(self.W) - 1, -1, -1):
            grads_W[i] = acts[i].T @ dh
            grads_b[i] = dh.sum(axis=0)
            if i > 0:
                dh = (dh @ self.W[i].T) * (1.0 - acts[i] ** 2)
        out = []
        for gw, gb in zip(grads_W, grads_b):
            out.extend([gw, gb])
        return out

    def flat_params(self):
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat_params(self, flat):
        arrays = []
        k = 0
        for p in self.params:
            arrays.append(np.asarray(flat[k:k + p.size]).reshape(p.shape))
            k += p.size
        self.set_params(arrays)


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        """Returns updated parameter arrays (inputs are not mutated)."""
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1 ** self.t)
            vhat = self.v[i] / (1 - self.beta2 ** self.t)
            out.append(p - self.lr * mhat / (np.sqrt(vhat) + self.eps))
        return out


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
