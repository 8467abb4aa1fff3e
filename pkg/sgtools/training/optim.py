import logging

import numpy as np

logger = logging.getLogger(__name__)


class Adam:
    """Adam over a dict of named numpy tensors."""

    def __init__(self, beta1=0.9, beta2=0.999, eps=1e-8, step_count=0,
                 first_moments=None, second_moments=None):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = step_count
        self.first_moments = dict(first_moments or {})
        self.second_moments = dict(second_moments or {})

    @classmethod
    def from_config(cls, config):
        return cls(config.beta1, config.beta2, config.adam_eps)

    def step(self, params, grads, lr):
        """Returns updated copies of params; moments advance even at lr 0."""
        self.step_count += 1
        t = self.step_count
        updated = {}
        for name, value in params.items():
            grad = grads[name]
            m = self.first_moments.get(name, np.zeros_like(value))
            v = self.second_moments.get(name, np.zeros_like(value))
            m = self.beta1 * m + (1.0 - self.beta1) * grad
            v = self.beta2 * v + (1.0 - self.beta2) * grad ** 2
            self.first_moments[name] = m
            self.second_moments[name] = v
            if lr == 0:
                updated[name] = value.copy()
                continue
            m_hat = m / (1.0 - self.beta1 ** t)
            v_hat = v / (1.0 - self.beta2 ** t)
            updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return updated

    def state_tensors(self):
        tensors = {}
        for name, value in self.first_moments.items():
            tensors['adam.m.' + name] = value
        for name, value in self.second_moments.items():
            tensors['adam.v.' + name] = value
        return tensors

    @classmethod
    def from_state(cls, tensors, step_count, beta1=0.9, beta2=0.999,
                   eps=1e-8):
        first = {name[len('adam.m.'):]: value for name, value in
                 tensors.items() if name.startswith('adam.m.')}
        second = {name[len('adam.v.'):]: value for name, value in
                  tensors.items() if name.startswith('adam.v.')}
        return cls(beta1, beta2, eps, step_count, first, second)
