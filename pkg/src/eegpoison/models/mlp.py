"""Fully connected ReLU network with a softmax head, trained by momentum SGD."""
import numpy as np

from ._deadline import check_deadline

N_CLASSES = 4


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(probs_or_logits, y, from_logits=True):
    if from_logits:
        z = probs_or_logits - probs_or_logits.max(axis=1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    else:
        logp = np.log(probs_or_logits)
    return float(-logp[np.arange(y.shape[0]), y].mean())


class MLP:
    """Layer widths ``[n_features, *hidden, 4]``.

    Weights start uniform in ``+-1/sqrt(fan_in)``, biases at zero. The loss is
    the mean cross-entropy of a batch. Trained on a single class, the network
    still learns but predictions are pinned to that class, since the softmax
    optimum there lies at infinity and extrapolated inputs could otherwise
    land anywhere.
    """

    def __init__(self, hidden=(64, 32), learning_rate=0.01, momentum=0.9, batch_size=32,
                 epochs=200, seed=0):
        self.hidden = tuple(hidden)
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def init_params(self, n_features, rng=None):
        rng = np.random.default_rng(self.seed) if rng is None else rng
        sizes = [n_features, *self.hidden, N_CLASSES]
        params = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            params.append(np.zeros(fan_out))
        self.params_ = params
        return params

    @property
    def layers(self):
        return [self.params_[0].shape[0]] + [W.shape[1] for W in self.params_[0::2]]

    def logits(self, X):
        h = np.asarray(X, dtype=np.float64)
        n_layers = len(self.params_) // 2
        for i in range(n_layers):
            h = h @ self.params_[2 * i] + self.params_[2 * i + 1]
            if i < n_layers - 1:
                h = np.maximum(h, 0.0)
        return h

    def predict_proba(self, X):
        return softmax(self.logits(X))

    def predict(self, X):
        if getattr(self, "only_class_", None) is not None:
            return np.full(np.shape(X)[0], self.only_class_, dtype=np.int64)
        return self.logits(X).argmax(axis=1)

    def loss(self, X, y):
        return cross_entropy(self.logits(X), np.asarray(y, dtype=np.int64))

    def loss_and_grad(self, X, y):
        """Mean cross-entropy and its gradient for every parameter (same order as ``params_``)."""
        n_layers = len(self.params_) // 2
        acts = [np.asarray(X, dtype=np.float64)]
        pre = []
        h = acts[0]
        for i in range(n_layers):
            z = h @ self.params_[2 * i] + self.params_[2 * i + 1]
            pre.append(z)
            h = np.maximum(z, 0.0) if i < n_layers - 1 else z
            acts.append(h)
        probs = softmax(acts[-1])
        n = y.shape[0]
        loss = float(-np.log(probs[np.arange(n), y]).mean())
        delta = probs
        delta[np.arange(n), y] -= 1.0
        delta /= n
        grads = [None] * len(self.params_)
        for i in range(n_layers - 1, -1, -1):
            grads[2 * i] = acts[i].T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.params_[2 * i].T) * (pre[i - 1] > 0)
        return loss, grads

    def fit(self, X, y, deadline=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        rng = np.random.default_rng(self.seed)
        present = np.unique(y)
        self.only_class_ = int(present[0]) if present.size == 1 else None
        self.init_params(X.shape[1], rng)
        velocity = [np.zeros_like(p) for p in self.params_]
        n = X.shape[0]
        self.loss_history_ = [self.loss(X, y)]
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                b = perm[start:start + self.batch_size]
                _, grads = self.loss_and_grad(X[b], y[b])
                for p, v, g in zip(self.params_, velocity, grads):
                    v *= self.momentum
                    v -= self.learning_rate * g
                    p += v
            self.loss_history_.append(self.loss(X, y))
            check_deadline(deadline, "MLP training")
        return self

    def summary(self):
        return {"epochs": len(self.loss_history_) - 1, "final_loss": self.loss_history_[-1],
                "loss_history": list(self.loss_history_)}

    def get_state(self):
        return {"params": [p.tolist() for p in self.params_], "only_class": getattr(self, "only_class_", None)}

    def set_state(self, state):
        self.params_ = [np.array(p, dtype=np.float64) for p in state["params"]]
        self.only_class_ = state.get("only_class")
        return self


def gradient_check(model, X, y, epsilon=1e-5):
    """Largest relative gap between backprop and central differences over all parameters.

    Relative error is ``|a - n| / max(|a|, |n|, 1e-7)``; the floor keeps
    parameters with (near) zero gradient, such as dead ReLU units, from
    dividing noise by noise.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _, grads = model.loss_and_grad(X, y)
    worst = 0.0
    for p, g in zip(model.params_, grads):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + epsilon
            up = model.loss(X, y)
            flat[j] = orig - epsilon
            down = model.loss(X, y)
            flat[j] = orig
            num = (up - down) / (2 * epsilon)
            rel = abs(gflat[j] - num) / max(abs(gflat[j]), abs(num), 1e-7)
            worst = max(worst, rel)
    return worst
