from .core.run import create_block
from .core.matrix import DimensionError
from .core.gradcheck import EvaluationError
from .core.metrics import UndefinedMetricError
from .core.training import TrainingDivergedError
from .core.store import StaleCacheError, CacheMissError
from .block.read.tsv import MalformedLineError
from .block.util.gradcheck import GradCheckFailed
