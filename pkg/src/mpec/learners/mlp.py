"""Single-hidden-layer tanh perceptron with softmax output, trained by Adam."""

import numpy as np

from ..errors import NumericalFailure
from .logreg import softmax

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
GRADCHECK_STEP = 1e-5
GRADCHECK_TOL = 1e-4

PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(n_in, n_hidden, n_out, rng):
    # Glorot-uniform weights, as usual for tanh units
    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return {
        "W1": glorot(n_in, n_hidden),
        "b1": glorot(1, n_hidden)[0],
        "W2": glorot(n_hidden, n_out),
        "b2": glorot(1, n_out)[0],
    }


def forward(params, X):
    H = np.tanh(X @ params["W1"] + params["b1"])
    return H, softmax(H @ params["W2"] + params["b2"])


def loss_and_grads(params, X, Y, l2_alpha):
    """Mean cross-entropy plus ``0.5 * alpha * ||W||^2 / batch`` and its gradient."""
    m = X.shape[0]
    H, P = forward(params, X)
    reg = 0.5 * l2_alpha * (np.sum(params["W1"] ** 2) + np.sum(params["W2"] ** 2)) / m
    loss = -np.sum(Y * np.log(np.maximum(P, 1e-300))) / m + reg
    dZ2 = (P - Y) / m
    dH = (dZ2 @ params["W2"].T) * (1.0 - H**2)
    grads = {
        "W2": H.T @ dZ2 + l2_alpha * params["W2"] / m,
        "b2": dZ2.sum(axis=0),
        "W1": X.T @ dH + l2_alpha * params["W1"] / m,
        "b1": dH.sum(axis=0),
    }
    return loss, grads


def _one_hot(y, n_classes):
    Y = np.zeros((y.shape[0], n_classes))
    Y[np.arange(y.shape[0]), y] = 1.0
    return Y


def _cross_entropy(logits, Y):
    """Mean cross-entropy over the last two axes, vectorized over leading ones."""
    z = logits - logits.max(axis=-1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
    return -np.sum(Y * logp, axis=(-2, -1)) / Y.shape[0]


def numeric_gradients(params, X, Y, l2_alpha, step=GRADCHECK_STEP):
    """Central-difference gradient of :func:`loss_and_grads`'s loss for every
    parameter, evaluating all single-coordinate perturbations at once."""
    m = X.shape[0]
    W1, b1, W2, b2 = (params[k] for k in PARAM_NAMES)
    H = np.tanh(X @ W1 + b1)
    logits = H @ W2 + b2
    reg = 0.5 * l2_alpha * (np.sum(W1**2) + np.sum(W2**2)) / m
    Xa = np.hstack([X, np.ones((m, 1))])
    Ha = np.hstack([H, np.ones((m, 1))])
    W1a = np.vstack([W1, b1])
    W2a = np.vstack([W2, b2])
    L = W2.shape[1]

    def hidden_loss(e):
        # entry (i, j): weight from input i (last: bias) into hidden unit j
        Hp = np.tanh((X @ W1 + b1)[None] + e * Xa.T[:, :, None])
        delta = np.transpose(Hp - H[None], (0, 2, 1))
        out = _cross_entropy(logits[None, None] + delta[..., None] * W2[None, :, None, :], Y)
        out[:-1] += 0.5 * l2_alpha * ((W1a[:-1] + e) ** 2 - W1a[:-1] ** 2) / m
        return out + reg

    def output_loss(e):
        # entry (j, c): weight from hidden unit j (last: bias) into class c
        shift = e * Ha.T[:, None, :, None] * np.eye(L)[None, :, None, :]
        out = _cross_entropy(logits[None, None] + shift, Y)
        out[:-1] += 0.5 * l2_alpha * ((W2a[:-1] + e) ** 2 - W2a[:-1] ** 2) / m
        return out + reg

    first = (hidden_loss(step) - hidden_loss(-step)) / (2 * step)
    second = (output_loss(step) - output_loss(-step)) / (2 * step)
    return {"W1": first[:-1], "b1": first[-1], "W2": second[:-1], "b2": second[-1]}


def gradient_check(X, y, n_classes, params, seed, n_probe=5):
    """Largest relative error between analytic and central-difference gradients
    at the initial weights, over the first ``n_probe`` samples."""
    rng = np.random.default_rng(seed)
    weights = init_params(X.shape[1], params.hidden, n_classes, rng)
    Xp, Yp = X[:n_probe], _one_hot(y[:n_probe], n_classes)
    _, grads = loss_and_grads(weights, Xp, Yp, params.l2_alpha)
    numeric = numeric_gradients(weights, Xp, Yp, params.l2_alpha)
    worst = 0.0
    for name in PARAM_NAMES:
        scale = max(np.linalg.norm(grads[name]), np.linalg.norm(numeric[name]), 1e-12)
        worst = max(worst, np.linalg.norm(grads[name] - numeric[name]) / scale)
    return worst


def fit(X, y, n_classes, params, seed, check_gradients=False):
    if check_gradients:
        err = gradient_check(X, y, n_classes, params, seed)
        if err > GRADCHECK_TOL:
            raise NumericalFailure(f"MLP gradient check failed: relative error {err:.2e}")
    rng = np.random.default_rng(seed)
    weights = init_params(X.shape[1], params.hidden, n_classes, rng)
    Y = _one_hot(y, n_classes)
    m = X.shape[0]
    first = {k: np.zeros_like(v) for k, v in weights.items()}
    second = {k: np.zeros_like(v) for k, v in weights.items()}
    t = 0
    for _ in range(params.epochs):
        order = rng.permutation(m)
        for start in range(0, m, params.batch_size):
            batch = order[start:start + params.batch_size]
            _, grads = loss_and_grads(weights, X[batch], Y[batch], params.l2_alpha)
            t += 1
            lr = params.learning_rate * np.sqrt(1 - ADAM_BETA2**t) / (1 - ADAM_BETA1**t)
            for name in PARAM_NAMES:
                g = grads[name]
                first[name] = ADAM_BETA1 * first[name] + (1 - ADAM_BETA1) * g
                second[name] = ADAM_BETA2 * second[name] + (1 - ADAM_BETA2) * g * g
                weights[name] -= lr * first[name] / (np.sqrt(second[name]) + ADAM_EPS)
    if not all(np.all(np.isfinite(w)) for w in weights.values()):
        raise NumericalFailure("MLP weights diverged")
    return weights


def scores(state, X):
    return forward(state, X)[1]
