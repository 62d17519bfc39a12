"""Topic models over the term-document matrix: LSI via randomized SVD and LDA
via a collapsed Gibbs sampler, plus fold-in projections and cosine similarity.

Both models are deterministic for a fixed seed. Document columns embed into a
k-dimensional space: LSI rows of Q hold the training embeddings and unseen text
folds in through the singular factors; LDA embeds documents as topic mixtures.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .corpus import DataError

_SIGMA_FLOOR = 1e-12  # relative to the leading singular value


@dataclass(frozen=True)
class LsiModel:
    P: np.ndarray      # terms x k, orthonormal columns
    sigma: np.ndarray  # k, non-increasing
    Q: np.ndarray      # documents x k, orthonormal columns
    seed: int

    @property
    def k(self) -> int:
        return int(self.sigma.shape[0])


@dataclass(frozen=True)
class LdaModel:
    beta: np.ndarray       # topics x vocabulary, rows sum to 1
    doc_topic: np.ndarray  # training documents x topics, rows sum to 1
    alpha: float
    eta: float
    sweeps: int
    seed: int

    @property
    def k(self) -> int:
        return int(self.beta.shape[0])


TopicModel = LsiModel | LdaModel


# ---------- LSI ----------

def randomized_svd(
    X: sparse.sparray | np.ndarray,
    k: int,
    oversampling: int = 100,
    exponent: int = 2,
    seed: int = 0,
) -> LsiModel:
    """Rank-k SVD by range finding: project onto a Gaussian sketch of width
    k + oversampling (clipped to the smaller matrix dimension), run ``exponent``
    power iterations with QR re-orthonormalization, then solve the small SVD."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n_rows, n_cols = X.shape
    small = min(n_rows, n_cols)
    if small == 0:
        raise ValueError("matrix has an empty dimension")
    k_eff = min(k, small)
    ell = min(k_eff + oversampling, small)

    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((n_cols, ell))
    Y = X @ omega
    Q, _ = np.linalg.qr(Y)
    for _ in range(exponent):
        Z, _ = np.linalg.qr(X.T @ Q)
        Q, _ = np.linalg.qr(X @ Z)
    B = (X.T @ Q).T  # ell x n_cols, dense
    Ub, s, Vt = np.linalg.svd(B, full_matrices=False)
    U = Q @ Ub
    return LsiModel(
        P=np.ascontiguousarray(U[:, :k_eff]),
        sigma=np.ascontiguousarray(s[:k_eff]),
        Q=np.ascontiguousarray(Vt[:k_eff].T),
        seed=seed,
    )


def lsi_project(model: LsiModel, vec: np.ndarray | sparse.sparray) -> np.ndarray:
    """Fold a vocabulary-sized vector into the LSI space: inv(Sigma) P^T v,
    zeroing components whose singular value is below 1e-12 of the leading one."""
    if sparse.issparse(vec):
        vec = np.asarray(vec.todense()).ravel()
    vec = np.asarray(vec, dtype=np.float64).ravel()
    if vec.shape[0] != model.P.shape[0]:
        raise ValueError(
            f"vector length {vec.shape[0]} != vocabulary size {model.P.shape[0]}"
        )
    lead = model.sigma[0] if model.sigma.size else 0.0
    inv = np.where(model.sigma > _SIGMA_FLOOR * lead, 1.0, 0.0)
    np.divide(inv, model.sigma, out=inv, where=inv > 0)
    return inv * (model.P.T @ vec)


# ---------- LDA ----------

def _doc_tokens(X: sparse.sparray) -> list[np.ndarray]:
    """Column j of the count matrix expanded to a flat token array of term ids."""
    csc = sparse.csc_array(X)
    data = csc.data
    if data.size and (np.any(data < 0) or np.any(data != np.floor(data))):
        raise DataError("LDA requires non-negative integer counts")
    docs = []
    for j in range(csc.shape[1]):
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        docs.append(np.repeat(csc.indices[lo:hi], csc.data[lo:hi].astype(np.int64)))
    return docs


def lda_fit(
    X: sparse.sparray | np.ndarray,
    k: int,
    alpha: float | None = None,
    eta: float = 0.01,
    sweeps: int = 500,
    seed: int = 0,
) -> LdaModel:
    """Collapsed Gibbs sampling with symmetric priors (alpha defaults to 50/k).

    Single-threaded; token visit order is fixed, so a seed pins the result.
    beta rows are the smoothed topic-term estimates from the final state and
    doc_topic rows the matching document mixtures.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if sparse.issparse(X):
        Xs = sparse.csc_array(X)
    else:
        Xs = sparse.csc_array(np.asarray(X))
    n_terms, n_docs = Xs.shape
    if n_docs == 0 or n_terms == 0:
        raise DataError("empty matrix")
    if alpha is None:
        alpha = 50.0 / k
    docs = _doc_tokens(Xs)

    rng = np.random.default_rng(seed)
    n_kw = np.zeros((k, n_terms), dtype=np.float64)
    n_k = np.zeros(k, dtype=np.float64)
    n_dk = np.zeros((n_docs, k), dtype=np.float64)
    assignments: list[np.ndarray] = []
    for d, tokens in enumerate(docs):
        z = rng.integers(0, k, size=tokens.shape[0])
        assignments.append(z)
        for w, t in zip(tokens, z):
            n_kw[t, w] += 1
            n_k[t] += 1
            n_dk[d, t] += 1

    eta_total = eta * n_terms
    for _ in range(sweeps):
        for d, tokens in enumerate(docs):
            z = assignments[d]
            row = n_dk[d]
            for i in range(tokens.shape[0]):
                w = tokens[i]
                t = z[i]
                n_kw[t, w] -= 1
                n_k[t] -= 1
                row[t] -= 1
                if eta_total == 0.0:
                    # an unassigned topic's word likelihood tends to 1/V
                    # as the smoothing vanishes; 0/0 would poison the draw
                    denom = n_k + eta_total
                    empty = denom == 0.0
                    like = np.where(
                        empty,
                        1.0 / n_terms,
                        (n_kw[:, w] + eta) / np.where(empty, 1.0, denom),
                    )
                    p = like * (row + alpha)
                else:
                    p = (n_kw[:, w] + eta) / (n_k + eta_total) * (row + alpha)
                cum = np.cumsum(p)
                t = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
                t = min(t, k - 1)
                z[i] = t
                n_kw[t, w] += 1
                n_k[t] += 1
                row[t] += 1

    beta = n_kw + eta
    denom = n_k + eta_total
    if eta == 0.0:
        empty = denom == 0.0
        beta[empty] = 1.0
        denom = np.where(empty, float(n_terms), denom)
    beta /= denom[:, None]
    lengths = np.array([t.shape[0] for t in docs], dtype=np.float64)
    doc_topic = (n_dk + alpha) / (lengths + k * alpha)[:, None]
    if alpha == 0.0:
        doc_topic[lengths == 0.0] = 1.0 / k
    return LdaModel(
        beta=beta, doc_topic=doc_topic, alpha=alpha, eta=eta, sweeps=sweeps, seed=seed
    )


def lda_project(
    model: LdaModel,
    vec: np.ndarray | sparse.sparray,
    sweeps: int = 100,
) -> np.ndarray:
    """Fold a count vector into the topic space by Gibbs sampling against the
    fixed beta; the mixture averages the post-burn-in sweeps. Deterministic for
    the model's seed; an empty document returns the uniform mixture."""
    if sweeps < 1:
        raise ValueError(f"sweeps must be >= 1, got {sweeps}")
    if sparse.issparse(vec):
        vec = np.asarray(vec.todense()).ravel()
    counts = np.asarray(vec, dtype=np.float64).ravel()
    k, n_terms = model.beta.shape
    if counts.shape[0] != n_terms:
        raise ValueError(f"vector length {counts.shape[0]} != vocabulary size {n_terms}")
    if np.any(counts < 0) or np.any(counts != np.floor(counts)):
        raise DataError("projection requires non-negative integer counts")
    tokens = np.repeat(np.arange(n_terms), counts.astype(np.int64))
    if tokens.size == 0:
        return np.full(k, 1.0 / k)

    rng = np.random.default_rng([model.seed, 0x7C])
    z = rng.integers(0, k, size=tokens.shape[0])
    n_t = np.zeros(k, dtype=np.float64)
    for t in z:
        n_t[t] += 1
    alpha = model.alpha
    burn_in = sweeps // 2
    acc = np.zeros(k, dtype=np.float64)
    samples = 0
    for sweep in range(sweeps):
        for i in range(tokens.shape[0]):
            w = tokens[i]
            t = z[i]
            n_t[t] -= 1
            p = model.beta[:, w] * (n_t + alpha)
            cum = np.cumsum(p)
            total = cum[-1]
            if total <= 0.0:
                t = int(rng.integers(0, k))
            else:
                t = int(np.searchsorted(cum, rng.random() * total, side="right"))
                t = min(t, k - 1)
            z[i] = t
            n_t[t] += 1
        if sweep >= burn_in:
            acc += (n_t + alpha) / (tokens.shape[0] + k * alpha)
            samples += 1
    theta = acc / samples
    return theta / theta.sum()


# ---------- similarity ----------

def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors; 0 when either has zero norm."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


# ---------- model caches ----------

_LSI_MAGIC = b"LSIM"
_LDA_MAGIC = b"LDAM"


def _write_array(fh, arr: np.ndarray) -> None:
    fh.write(np.asfortranarray(arr, dtype=np.float64).tobytes(order="F"))


def save_lsi(model: LsiModel, path: str | Path) -> None:
    """Small header (dims, k, seed) followed by column-major float64 blobs."""
    n_terms, k = model.P.shape
    n_docs = model.Q.shape[0]
    with open(path, "wb") as fh:
        fh.write(_LSI_MAGIC)
        fh.write(struct.pack("<4q", n_terms, n_docs, k, model.seed))
        _write_array(fh, model.P)
        _write_array(fh, model.sigma)
        _write_array(fh, model.Q)


def load_lsi(path: str | Path) -> LsiModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _LSI_MAGIC:
            raise DataError(f"{path}: not an LSI model file")
        n_terms, n_docs, k, seed = struct.unpack("<4q", fh.read(32))
        P = np.frombuffer(fh.read(8 * n_terms * k), dtype="<f8").reshape(
            (n_terms, k), order="F"
        )
        sigma = np.frombuffer(fh.read(8 * k), dtype="<f8")
        Q = np.frombuffer(fh.read(8 * n_docs * k), dtype="<f8").reshape(
            (n_docs, k), order="F"
        )
    return LsiModel(P=P.copy(), sigma=sigma.copy(), Q=Q.copy(), seed=int(seed))


def save_lda(model: LdaModel, path: str | Path) -> None:
    k, n_terms = model.beta.shape
    n_docs = model.doc_topic.shape[0]
    with open(path, "wb") as fh:
        fh.write(_LDA_MAGIC)
        fh.write(struct.pack("<4q", k, n_terms, n_docs, model.seed))
        fh.write(struct.pack("<2d", model.alpha, model.eta))
        fh.write(struct.pack("<q", model.sweeps))
        _write_array(fh, model.beta)
        _write_array(fh, model.doc_topic)


def load_lda(path: str | Path) -> LdaModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _LDA_MAGIC:
            raise DataError(f"{path}: not an LDA model file")
        k, n_terms, n_docs, seed = struct.unpack("<4q", fh.read(32))
        alpha, eta = struct.unpack("<2d", fh.read(16))
        (sweeps,) = struct.unpack("<q", fh.read(8))
        beta = np.frombuffer(fh.read(8 * k * n_terms), dtype="<f8").reshape(
            (k, n_terms), order="F"
        )
        doc_topic = np.frombuffer(fh.read(8 * n_docs * k), dtype="<f8").reshape(
            (n_docs, k), order="F"
        )
    return LdaModel(
        beta=beta.copy(),
        doc_topic=doc_topic.copy(),
        alpha=float(alpha),
        eta=float(eta),
        sweeps=int(sweeps),
        seed=int(seed),
    )
