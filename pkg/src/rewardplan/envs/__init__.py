"""Task environments: exact-arithmetic Game of 24 and the toy web shop."""

from rewardplan.envs.game24 import Game24Env
from rewardplan.envs.shop import ShopEnv

__all__ = ["Game24Env", "ShopEnv"]
