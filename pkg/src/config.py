import os
from dataclasses import dataclass
from pathlib import Path
from dotenv import load_dotenv

def _get_bool(name: str, default: bool) -> bool:
    v = os.getenv(name)
    if v is None:
        return default
    return v.strip().lower() in ("1", "true", "yes", "y", "on")

def _get_int(name: str, default: int) -> int:
    v = os.getenv(name)
    if v is None:
        return default
    return int(v)

@dataclass(frozen=True)
class Settings:
    log_level: str

    # Gauss points per element are p + extra
    quad_extra: int
    error_quad_extra: int

    workers: int
    permute: bool
    refinement_steps: int
    condition_iterations: int

    output_dir: Path

def load_settings() -> Settings:
    load_dotenv()

    quad_extra = _get_int("DPG_QUAD_EXTRA", 5)
    error_quad_extra = _get_int("DPG_ERROR_QUAD_EXTRA", 8)
    if quad_extra < 4 or error_quad_extra < 4:
        raise ValueError("DPG_QUAD_EXTRA and DPG_ERROR_QUAD_EXTRA must be at least 4")

    workers = _get_int("DPG_WORKERS", 4)
    if workers < 1:
        raise ValueError("DPG_WORKERS must be positive")

    refinement_steps = _get_int("DPG_REFINEMENT_STEPS", 2)
    if refinement_steps < 0:
        raise ValueError("DPG_REFINEMENT_STEPS must be nonnegative")

    return Settings(
        log_level=os.getenv("LOG_LEVEL", "INFO").strip().upper(),
        quad_extra=quad_extra,
        error_quad_extra=error_quad_extra,
        workers=workers,
        permute=_get_bool("DPG_PERMUTE", True),
        refinement_steps=refinement_steps,
        condition_iterations=_get_int("DPG_CONDITION_ITERATIONS", 300),
        output_dir=Path(os.getenv("DPG_OUTPUT_DIR", "./results")).resolve(),
    )
