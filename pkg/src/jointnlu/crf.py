"""Linear-chain CRF: path scoring, exact log-partition by the forward
algorithm, Viterbi decoding, and the negative log-likelihood loss.

Emission scores P are (n x k); transitions A are ((k+2) x (k+2)) with two
reserved states, START = k and STOP = k+1. Transitions into START and out of
STOP are pinned at -1e4 so log-space sums stay finite while the moves remain
effectively forbidden.
"""

from __future__ import annotations

import numpy as np

from .numerics import Parameter, Tensor

FORBIDDEN = -1.0e4


class TransitionMatrix:
    """Trainable (k+2)x(k+2) transition scores with START/STOP sentinels."""

    def __init__(self, k, rng=None, name="crf.A"):
        self.k = k
        init = np.zeros((k + 2, k + 2)) if rng is None \
            else rng.uniform(-0.1, 0.1, size=(k + 2, k + 2))
        self.A = Parameter(name, init)
        self.fix_constraints()

    @property
    def start(self):
        return self.k

    @property
    def stop(self):
        return self.k + 1

    def fix_constraints(self):
        """Re-pin forbidden entries; call after every optimizer step."""
        self.A.value[:, self.start] = FORBIDDEN
        self.A.value[self.stop, :] = FORBIDDEN

    def parameters(self):
        return [self.A]


def _as_arrays(P, A):
    p = P.value if isinstance(P, Tensor) else np.asarray(P, dtype=np.float64)
    a = A.value if isinstance(A, Tensor) else np.asarray(A, dtype=np.float64)
    return p, a


def path_score(P, A, y):
    """Emission sum plus transition sum including START->y[0] and
    y[-1]->STOP boundary terms. Pure float computation."""
    p, a = _as_arrays(P, A)
    n, k = p.shape
    if len(y) != n:
        raise ValueError("path length differs from emission rows")
    if any(not 0 <= t < k for t in y):
        raise IndexError("tag index out of range")
    start, stop = k, k + 1
    score = a[start, y[0]] + a[y[-1], stop]
    score += sum(p[i, y[i]] for i in range(n))
    score += sum(a[y[i], y[i + 1]] for i in range(n - 1))
    return float(score)


def log_partition(P, A):
    """log sum over all k^n paths of exp(path_score), by the forward
    algorithm in log space. Differentiable when P/A are Tensors."""
    P = Tensor.of(P)
    A = Tensor.of(A)
    n, k = P.value.shape
    start, stop = k, k + 1
    alpha = A[start, 0:k] + P[0]  # (k,)
    for i in range(1, n):
        # alpha[j'] = logsumexp_j(alpha[j] + A[j, j']) + P[i, j']
        scores = alpha.reshape(k, 1) + A[0:k, 0:k] + P[i].reshape(1, k)
        alpha = scores.logsumexp(axis=0)
    final = alpha + A[0:k, stop]
    return final.logsumexp()


def sequence_log_prob(P, A, y):
    """path_score - log_partition; always <= 0."""
    p, a = _as_arrays(P, A)
    return path_score(p, a, y) - float(log_partition(p, a).value)


def nll_loss(P, A, y):
    """-log p(y | X) as a scalar Tensor; backward yields exact gradients
    into P and A (marginals minus gold indicators, via the log-space
    forward recursion)."""
    P = Tensor.of(P)
    A = Tensor.of(A)
    n, k = P.value.shape
    start, stop = k, k + 1
    gold = A[start, y[0]] + A[y[-1], stop]
    for i in range(n):
        gold = gold + P[i, y[i]]
    for i in range(n - 1):
        gold = gold + A[y[i], y[i + 1]]
    return log_partition(P, A) - gold


def viterbi_decode(P, A):
    """(best path, best score) maximizing path_score; ties broken toward
    the lowest tag index at each backtracking step."""
    p, a = _as_arrays(P, A)
    n, k = p.shape
    start, stop = k, k + 1
    delta = a[start, :k] + p[0]
    back = np.zeros((n, k), dtype=int)
    for i in range(1, n):
        scores = delta[:, None] + a[:k, :k]  # prev tag x next tag
        back[i] = np.argmax(scores, axis=0)  # argmax takes the lowest index on ties
        delta = scores[back[i], np.arange(k)] + p[i]
    final = delta + a[:k, stop]
    last = int(np.argmax(final))
    best_score = float(final[last])
    path = [last]
    for i in range(n - 1, 0, -1):
        path.append(int(back[i, path[-1]]))
    path.reverse()
    return path, best_score


def enumerate_paths(n, k):
    """All k^n tag index sequences (test oracle helper)."""
    import itertools
    return list(itertools.product(range(k), repeat=n))
