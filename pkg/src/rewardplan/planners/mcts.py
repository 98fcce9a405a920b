"""Monte Carlo tree search over deterministic environments.

Selection uses UCT with a configurable exploration constant; backup
tracks the maximum full-trajectory reward through each node, not the
mean. Rewards are only ever computed on complete root-to-end
trajectories. Fully-explored subtrees are pruned so a search never
re-simulates a finished path; the budget therefore counts distinct
simulations.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from rewardplan.core.env import Environment
from rewardplan.core.types import Action, Instruction, Trajectory, trajectory_append
from rewardplan.errors import ConfigError
from rewardplan.planners.rollout import rollout
from rewardplan.planners.types import Budget, PlanResult, argmax_result
from rewardplan.policy.base import Policy, PolicyContext
from rewardplan.reward.backends import RewardBackend

DEFAULT_EXPLORATION_C = math.sqrt(2)


def state_fingerprint(trajectory: Trajectory) -> str:
    """Node identity: a digest of the observation sequence (environments
    are deterministic, so observations identify state)."""
    h = hashlib.sha256()
    for text in (o.text for o in trajectory.observations):
        h.update(text.encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()[:16]


@dataclass
class SearchNode:
    fingerprint: str
    incoming: Action | None
    visits: int = 0
    value: float = float("-inf")
    children: dict[str, "SearchNode"] = field(default_factory=dict)
    untried: list[Action] | None = None  # None = proposals not fetched yet
    exhausted: bool = False

    def live_children(self) -> list["SearchNode"]:
        return [c for c in self.children.values() if not c.exhausted]


def _uct(parent: SearchNode, child: SearchNode, c: float) -> float:
    return child.value + c * math.sqrt(math.log(parent.visits) / child.visits)


def _propagate_exhaustion(path: list[SearchNode]) -> None:
    # A node is done once it has no untried actions and no live children.
    for node in reversed(path):
        if node.exhausted:
            continue
        if node.untried is not None and not node.untried and not node.live_children():
            node.exhausted = True


def _fetch_untried(
    node: SearchNode,
    policy: Policy,
    instruction: Instruction,
    trajectory: Trajectory,
    env: Environment,
    top_k: int,
    seed: int,
) -> None:
    ctx = PolicyContext(
        instruction=instruction,
        trajectory_so_far=trajectory,
        valid_actions=env.valid_actions(),
        temperature=1.0,
        seed=seed,
    )
    proposals = policy.propose(ctx, k=top_k)
    seen: set[str] = set(node.children)
    untried: list[Action] = []
    for p in proposals:
        if p.action.text not in seen:
            seen.add(p.action.text)
            untried.append(p.action)
    node.untried = untried


def mcts_search(
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    reward: RewardBackend,
    budget: Budget,
    exploration_c: float = DEFAULT_EXPLORATION_C,
    seed: int = 0,
) -> tuple[PlanResult, SearchNode]:
    """Run the search and return (result, root) for tree inspection."""
    o0 = env.reset(instruction)
    base = env.clone()
    empty = Trajectory(instruction, o0, (), terminal=base.is_terminal())
    root = SearchNode(fingerprint=state_fingerprint(empty), incoming=None)
    explored: list[tuple[Trajectory, float]] = []

    while len(explored) < budget.max_trajectories and not root.exhausted:
        sim = base.clone()
        trajectory = empty
        node = root
        path = [root]
        while True:
            if sim.is_terminal() or len(trajectory) >= budget.max_actions_per_trajectory:
                # Complete path rediscovered during selection: prune and retry.
                node.exhausted = True
                _propagate_exhaustion(path)
                break
            if node.untried is None:
                _fetch_untried(node, policy, instruction, trajectory, sim, budget.top_k_actions, seed)
            if node.untried:
                action = node.untried.pop(0)
                observation = sim.step(action)
                trajectory = trajectory_append(
                    trajectory, action, observation,
                    terminal=sim.is_terminal(),
                    max_actions=budget.max_actions_per_trajectory,
                )
                child = SearchNode(fingerprint=state_fingerprint(trajectory), incoming=action)
                node.children[action.text] = child
                path.append(child)
                if sim.is_terminal() or len(trajectory) >= budget.max_actions_per_trajectory:
                    child.exhausted = True
                else:
                    trajectory = rollout(
                        sim, instruction, policy, budget,
                        temperature=1.0, seed=seed + len(explored), prefix=trajectory,
                    )
                score = reward.score(instruction, trajectory, sim.outcome_extras())
                for visited in path:
                    visited.visits += 1
                    visited.value = max(visited.value, score)
                explored.append((trajectory, score))
                _propagate_exhaustion(path)
                break
            live = node.live_children()
            if not live:
                node.exhausted = True
                _propagate_exhaustion(path)
                break
            parent = node
            node = max(live, key=lambda ch: _uct(parent, ch, exploration_c))
            observation = sim.step(node.incoming)
            trajectory = trajectory_append(
                trajectory, node.incoming, observation,
                terminal=sim.is_terminal(),
                max_actions=budget.max_actions_per_trajectory,
            )
            path.append(node)

    if not explored:
        raise ConfigError("search produced no trajectories (environment already terminal?)")
    return argmax_result(explored), root


def run_mcts(
    env: Environment,
    instruction: Instruction,
    policy: Policy,
    reward: RewardBackend,
    budget: Budget,
    exploration_c: float = DEFAULT_EXPLORATION_C,
    seed: int = 0,
) -> PlanResult:
    result, _ = mcts_search(env, instruction, policy, reward, budget, exploration_c, seed)
    return result
