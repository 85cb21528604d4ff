from pydantic import BaseModel, Field, model_validator

from phase_space_tomography.constants import KERNEL_SERIES_MAX_TERMS


class KernelSpec(BaseModel):
    """Generalized Markov kernel M^{q,p}_λ: parameter, shift centre and series cap."""

    lam_re: float = Field(..., description="Real part of lambda")
    lam_im: float = Field(0.0, description="Imaginary part of lambda")
    q: float = Field(0.0, description="Shift centre q")
    p: float = Field(0.0, description="Shift centre p")
    max_terms: int = Field(KERNEL_SERIES_MAX_TERMS, ge=1, description="Hermite-series term cap")

    @model_validator(mode="after")
    def _open_disk(self) -> "KernelSpec":
        if abs(complex(self.lam_re, self.lam_im)) >= 1.0:
            raise ValueError("Markov kernel requires |lambda| < 1")
        return self

    @property
    def lam(self) -> complex:
        return complex(self.lam_re, self.lam_im)
