"""Model and training configuration."""
import dataclasses
from dataclasses import dataclass

DEFAULT_SEED = 7

MODEL_KINDS = ('lrea', 'din', 'din_short')
ACTIVATIONS = ('leaky_relu', 'relu')


class _FromDict(object):
    """Mixin: construct from a plain dict, rejecting unknown keys."""

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, values):
        unknown = set(values) - set(cls.field_names())
        if unknown:
            raise TypeError(f"Unknown {cls.__name__} keys {sorted(unknown)}.\n"
                            f"Known keys are: {', '.join(cls.field_names())}")
        config = cls(**values)
        config.validate()
        return config

    @classmethod
    def from_params(cls, values):
        """Like from_dict, but values may be block parameters (strings and numbers).

        Booleans accept 0/1, tuples accept comma-separated integers, e.g. head_sizes=64,32.
        """
        defaults = {f.name: f.default for f in dataclasses.fields(cls)}
        converted = {}
        for name, value in values.items():
            default = defaults.get(name)
            if isinstance(default, bool) and not isinstance(value, bool):
                value = str(value).lower() in ('1', 'true', 'yes')
            elif isinstance(default, tuple) and not isinstance(value, (tuple, list)):
                value = tuple(int(size) for size in str(value).split(',') if size.strip())
            elif isinstance(default, float) and isinstance(value, int):
                value = float(value)
            converted[name] = value
        return cls.from_dict(converted)

    def replace(self, **changes):
        config = dataclasses.replace(self, **changes)
        config.validate()
        return config

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ModelConfig(_FromDict):
    """Shapes and structural choices of one model.

    kind: lrea (low-rank attention on the long sequence), din (DIN target attention
        on the long sequence) or din_short (short-term DIN branch only)
    vocab_size: item vocabulary including the padding id 0
    side_vocab_size: side-feature vocabulary including the padding id 0
    seq_len: L, capacity of the long sequence
    short_len: S, capacity of the short sequence
    rank: r, compressed length (r <= L)
    dim: d, embedding dimension
    hidden: h, attention hidden width
    head_sizes: hidden layers of the prediction MLP (a final 1-unit layer is implied)
    """
    kind: str = 'lrea'
    vocab_size: int = 1001
    side_vocab_size: int = 17
    seq_len: int = 200
    short_len: int = 10
    rank: int = 128
    dim: int = 16
    hidden: int = 36
    head_sizes: tuple = (512, 256, 128)
    activation: str = 'leaky_relu'
    leaky_slope: float = 0.01
    use_short: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'head_sizes', tuple(int(size) for size in self.head_sizes))

    def validate(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        for name in ('vocab_size', 'side_vocab_size', 'seq_len', 'short_len', 'rank', 'dim', 'hidden'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if any(size < 1 for size in self.head_sizes):
            raise ValueError(f"head_sizes must be positive, got {self.head_sizes}")
        if self.kind == 'lrea' and self.rank > self.seq_len:
            raise ValueError(f"rank r={self.rank} must not exceed seq_len L={self.seq_len}")
        if not 0 < self.leaky_slope < 1:
            raise ValueError(f"leaky_slope must be in (0, 1), got {self.leaky_slope}")
        if self.kind == 'din_short' and not self.use_short:
            raise ValueError('kind=din_short needs use_short=True')


@dataclass(frozen=True)
class TrainConfig(_FromDict):
    """Optimisation settings.

    lam: weight λ of the non-negativity penalty
    stop_penalty_gradient: ablation, the penalty on W_Comp^T·E_s does not reach the embeddings
    precision: 64 or 32 bit parameters
    threads: worker threads used to shard each batch
    """
    lam: float = 0.3
    learning_rate: float = 0.01
    batch_size: int = 64
    epochs: int = 5
    seed: int = DEFAULT_SEED
    epsilon: float = 1e-8
    stop_penalty_gradient: bool = False
    precision: int = 64
    threads: int = 1

    def validate(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1 or self.threads < 1:
            raise ValueError('batch_size and threads must be positive')
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.precision not in (32, 64):
            raise ValueError(f"precision must be 32 or 64, got {self.precision}")
