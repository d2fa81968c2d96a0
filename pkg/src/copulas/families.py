"""
Catálogo de familias de cópulas bivariadas: etiquetas, dominios y orden fijo de desempate.
"""
from dataclasses import dataclass
from enum import Enum

from src.config import settings
from src.utils.errors import CopulaDomainError


class Family(str, Enum):
    INDEPENDENCE = "independence"
    GAUSSIAN = "gaussian"
    STUDENT_T = "student_t"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"

    @property
    def n_params(self) -> int:
        return {
            Family.INDEPENDENCE: 0,
            Family.STUDENT_T: 2,
        }.get(self, 1)

    @property
    def rotatable(self) -> bool:
        # Gaussian, t y Frank ya son cerradas por reflexión
        return self in (Family.CLAYTON, Family.GUMBEL)


FAMILY_ORDER: tuple[Family, ...] = tuple(Family)
ROTATIONS: tuple[int, ...] = (0, 90, 180, 270)


@dataclass(frozen=True, order=True)
class FamilyTag:
    family: Family
    rotation: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.rotation not in ROTATIONS:
            raise CopulaDomainError(f"Rotación inválida: {self.rotation}")
        if self.rotation and not self.family.rotatable:
            raise CopulaDomainError(f"La familia {self.family.value} no admite rotación {self.rotation}")

    @property
    def n_params(self) -> int:
        return self.family.n_params

    @property
    def negative_dependence(self) -> bool:
        return self.rotation in (90, 270)

    @property
    def sort_key(self) -> tuple[int, int, int]:
        """Orden de desempate: menos parámetros, luego orden fijo de familias y rotaciones."""
        return (self.n_params, FAMILY_ORDER.index(self.family), ROTATIONS.index(self.rotation))

    @property
    def label(self) -> str:
        return self.family.value if not self.rotation else f"{self.family.value}_{self.rotation}"

    @classmethod
    def parse(cls, text: str) -> "FamilyTag":
        """Acepta 'clayton', 'clayton_90', 'gaussian'..."""
        name, _, rot = text.strip().lower().rpartition("_")
        if name and rot.isdigit():
            return cls(Family(name), int(rot))
        return cls(Family(text.strip().lower()))


def expand_menu(names: list[str] | tuple[str, ...]) -> list[FamilyTag]:
    """
    Expande nombres de familias al menú completo de etiquetas.
    Clayton y Gumbel sin rotación explícita se expanden a las cuatro rotaciones.
    """
    menu: list[FamilyTag] = []
    for name in names:
        tag = FamilyTag.parse(name)
        explicit_rotation = name.strip().rsplit("_", 1)[-1].isdigit()
        if tag.family.rotatable and not explicit_rotation:
            menu.extend(FamilyTag(tag.family, r) for r in ROTATIONS)
        else:
            menu.append(tag)
    return list(dict.fromkeys(menu))


def param_bounds(family: Family) -> tuple[tuple[float, float], ...]:
    if family is Family.INDEPENDENCE:
        return ()
    return tuple(tuple(b) for b in settings.COPULA_PARAM_BOUNDS[family.value])
