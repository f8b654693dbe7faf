from __future__ import annotations

from ..ppvg import ppvg_forward
from .base import Agent


class PpvgAgent(Agent):
    def __init__(self, sim, node, tree):
        super().__init__(sim, node)
        self.tree = tree

    def route(self, packet, origin):
        self.sim.send_data(self.node, packet, ppvg_forward(self.tree, self.node, packet))
