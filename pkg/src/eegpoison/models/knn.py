import numpy as np

from .. import kernels


class KNNClassifier:
    """k-nearest-neighbour vote over a stored training set.

    Neighbours are ranked by Euclidean distance with the training row index
    breaking exact ties. A tied vote goes to the class owning the closest
    neighbour, then to the lower label.
    """

    def __init__(self, k=5):
        self.k = k

    def fit(self, X, y, deadline=None):
        self.X_ = np.ascontiguousarray(X, dtype=np.float64)
        self.y_ = np.ascontiguousarray(y, dtype=np.int64)
        return self

    def predict(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        return kernels.knn_predict(self.X_, self.y_, X, self.k)

    def summary(self):
        return {"n_stored": int(self.X_.shape[0])}

    def get_state(self):
        return {"X": self.X_.tolist(), "y": self.y_.tolist()}

    def set_state(self, state):
        d = len(state["X"][0]) if state["X"] else 0
        self.X_ = np.array(state["X"], dtype=np.float64).reshape(-1, d)
        self.y_ = np.array(state["y"], dtype=np.int64)
        return self
