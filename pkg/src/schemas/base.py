from pydantic import BaseModel, ConfigDict


class WorkbenchModel(BaseModel):
    """
    Base model for domain types and report rows. Arrays and callables are
    carried as arbitrary types; instances are immutable after construction.
    """

    model_config = ConfigDict(
        populate_by_name=True,
        from_attributes=True,
        arbitrary_types_allowed=True,
        frozen=True,
    )
