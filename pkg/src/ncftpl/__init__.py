"""Non-convex online learning with offline optimization oracles.

Follow-the-Perturbed-Leader with exponential noise, the FTRL baseline,
grid-based offline oracles, stability and regret harnesses, zero-sum
self-play and the experts-to-hypercube embedding.
"""

from .adversaries import *  # noqa: F401,F403
from .domain import *  # noqa: F401,F403
from .games import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403
from .learners import *  # noqa: F401,F403
from .losses import *  # noqa: F401,F403
from .oracles import *  # noqa: F401,F403
from . import adversaries, domain, games, harness, learners, losses, oracles

__version__ = "0.1.0"

__all__ = (adversaries.__all__ + domain.__all__ + games.__all__ + harness.__all__
           + learners.__all__ + losses.__all__ + oracles.__all__)
