"""
Centralized configuration using environment variables.
"""
from pydantic import BaseModel
from dotenv import load_dotenv
import os

load_dotenv()

class Settings(BaseModel):
    log_level: str = os.getenv("MVTANGENT_LOG_LEVEL", "INFO")

    # Triangulation termination guard (stellar blow-ups per operation)
    blowup_budget: int = int(os.getenv("MVTANGENT_BLOWUP_BUDGET", "1000000"))

    # Numeric tangent path
    numeric_tol: float = float(os.getenv("MVTANGENT_TOL", "1e-6"))
    residual_floor: float = float(os.getenv("MVTANGENT_RESIDUAL_FLOOR", "1e-12"))
    frame_tol: float = float(os.getenv("MVTANGENT_FRAME_TOL", "1e-9"))
    tail_fraction: float = float(os.getenv("MVTANGENT_TAIL_FRACTION", "0.25"))

    # Witness pipeline
    m_max_default: int = int(os.getenv("MVTANGENT_M_MAX", "64"))
    rationalize_denominator: int = int(os.getenv("MVTANGENT_MAX_DEN", "1000000"))

settings = Settings()
