from enum import Enum


class Scenario(Enum):
    SINGLE = "Single"
    DOUBLE = "Double"

    @property
    def tag(self) -> int:
        """
        One-byte tag used in the dataset file
        """
        return list(Scenario).index(self)

    @staticmethod
    def from_tag(tag: int) -> "Scenario":
        return list(Scenario)[tag]
