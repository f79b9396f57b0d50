"""Adapter lookup by algorithm name."""

from dp_sco_toolkit.adapters.base_adapter import AlgorithmAdapter
from dp_sco_toolkit.adapters.localized_md_adapter import LocalizedMdAdapter
from dp_sco_toolkit.adapters.noisy_md_adapter import NoisyMdAdapter
from dp_sco_toolkit.adapters.sc_wrapper_adapter import ScWrapperAdapter
from dp_sco_toolkit.adapters.tree_fw_adapter import TreeFwAdapter
from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.models.experiment_models import AlgorithmName

_ADAPTERS: dict[str, type[AlgorithmAdapter]] = {
    AlgorithmName.NOISY_MD.value: NoisyMdAdapter,
    AlgorithmName.LOCALIZED_MD.value: LocalizedMdAdapter,
    AlgorithmName.TREE_FW.value: TreeFwAdapter,
}


def create_adapter(algorithm: AlgorithmName | str, inner: str | None = None) -> AlgorithmAdapter:
    """Adapter for ``algorithm``; sc-wrapper wraps the adapter named by ``inner``.

    Raises:
        DomainError: For unknown names or a missing inner algorithm
    """
    try:
        name = AlgorithmName(algorithm).value
    except ValueError:
        raise DomainError(f"unknown algorithm {algorithm!r}") from None
    if name == AlgorithmName.SC_WRAPPER.value:
        if inner is None:
            raise DomainError("sc-wrapper needs an inner algorithm")
        inner_adapter = create_adapter(inner)
        if not inner_adapter.supports_reduction:
            raise DomainError(f"{inner} cannot be used inside sc-wrapper")
        return ScWrapperAdapter(inner_adapter)
    return _ADAPTERS[name]()
