from __future__ import annotations


class Agent:
    """Per-node strategy state machine driven by the engine."""

    def __init__(self, sim, node: int):
        self.sim = sim
        self.node = node
        self.is_sink = node == sim.sink
        # (source, seq) pairs already handled here; also absorbs ETX repeats
        self.seen: set = set()

    def start(self) -> None:
        pass

    def first_sight(self, packet) -> bool:
        key = packet.key
        if key in self.seen:
            return False
        self.seen.add(key)
        return True

    def on_generate(self, packet) -> None:
        self.seen.add(packet.key)
        self.route(packet, origin=True)

    def on_data(self, frame) -> None:
        if self.first_sight(frame.payload):
            self.route(frame.payload, origin=False)

    def route(self, packet, origin: bool) -> None:
        raise NotImplementedError

    def on_control(self, frame) -> None:
        pass

    def on_timer(self, key) -> None:
        pass
