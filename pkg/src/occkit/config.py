"""
Configuration management for occkit.
"""
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from dotenv import load_dotenv

from .exceptions import InvalidArgumentError


# Load environment variables from .env file
load_dotenv()

VALID_METRICS = ("manhattan", "euclidean")
VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _env_int(name: str, default: int, errors: List[str]) -> int:
    """Read an integer variable; a malformed value is recorded in `errors` and the default kept."""
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        errors.append(f"{name} must be an integer, got {raw!r}.")
        return default


@dataclass
class Config:
    """
    Process-wide defaults, overridable through OCCKIT_* environment variables.
    """
    # Reproducibility
    seed: int = 0

    # Execution
    threads: int = 1
    show_progress: bool = True
    log_level: str = "WARNING"

    # Neighbour descriptors
    metric: str = "manhattan"

    # Evaluation protocol
    n_folds: int = 5
    min_target_rows: int = 10
    min_other_rows: int = 5

    # SVM solver
    svm_tol: float = 1e-4
    svm_max_iterations: int = 1_000_000

    # Isolation forests
    if_trees: int = 100

    # Malformed environment values, reported by validate()
    env_errors: List[str] = field(default_factory=list, repr=False)

    @classmethod
    def from_env(cls) -> "Config":
        """
        Create a Config instance from environment variables.
        """
        errors: List[str] = []
        return cls(
            seed=_env_int("OCCKIT_SEED", 0, errors),
            threads=_env_int("OCCKIT_THREADS", 1, errors),
            show_progress=os.getenv("OCCKIT_PROGRESS", "True").lower() == "true",
            log_level=os.getenv("OCCKIT_LOG_LEVEL", "WARNING").upper(),
            metric=os.getenv("OCCKIT_METRIC", "manhattan").lower(),
            env_errors=errors,
        )

    def validate(self) -> Optional[str]:
        """
        Validate the configuration.

        Returns:
            Optional[str]: Error message if validation fails, None otherwise.
        """
        if self.env_errors:
            return self.env_errors[0]

        if self.seed < 0:
            return "Seed must be a nonnegative integer."

        if self.threads <= 0:
            return "Thread count must be positive."

        if self.metric not in VALID_METRICS:
            return f"Metric '{self.metric}' is not one of {list(VALID_METRICS)}."

        if self.log_level not in VALID_LOG_LEVELS:
            return f"Log level '{self.log_level}' is not one of {list(VALID_LOG_LEVELS)}."

        if self.n_folds < 2:
            return "At least 2 folds are required."

        if self.min_target_rows < self.n_folds * 2:
            return "Each fold needs at least 2 target rows."

        if self.svm_tol <= 0:
            return "SVM tolerance must be positive."

        if self.if_trees <= 0:
            return "Isolation forests need at least one tree."

        return None


@dataclass
class RunConfig:
    """
    Everything a single CLI command needs, resolved from flags over Config.
    """
    command: str
    data_paths: List[str] = field(default_factory=list)
    descriptor: str = "alp"
    # Descriptor coefficients given on the command line; missing ones take the defaults.
    coefficients: Dict[str, float] = field(default_factory=dict)
    metric: str = "manhattan"
    seed: int = 0
    output_path: Optional[str] = None
    threads: int = 1
    model_path: Optional[str] = None

    @classmethod
    def from_options(cls, command: str, config: Config, **options) -> "RunConfig":
        """
        Layer command-line options over the process configuration.

        Options left as None fall back to the configuration.
        """
        seed = options.pop("seed", None)
        metric = options.pop("metric", None)
        threads = options.pop("threads", None)
        coefficients = {k: v for k, v in (options.pop("coefficients", None) or {}).items() if v is not None}
        if seed is not None and int(seed) < 0:
            raise InvalidArgumentError(f"--seed must be a nonnegative integer, got {seed}.")
        return cls(
            command=command,
            seed=config.seed if seed is None else int(seed),
            metric=(metric or config.metric).lower(),
            threads=config.threads if threads is None else int(threads),
            coefficients=coefficients,
            **options,
        )

    def to_dict(self) -> Dict[str, object]:
        """Convert the run configuration to a dictionary."""
        return {
            "command": self.command,
            "data_paths": list(self.data_paths),
            "descriptor": self.descriptor,
            "coefficients": dict(self.coefficients),
            "metric": self.metric,
            "seed": self.seed,
            "output_path": self.output_path,
            "threads": self.threads,
            "model_path": self.model_path,
        }
