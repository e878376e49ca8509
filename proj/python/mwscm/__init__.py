"""Mobile Web service composition mediator.

Thin python surface over the C++ core: document parsing, operation-type
matching, MBV vendor scoring, scenario runs and the cache-sweep experiments.
"""

from _mwscm import (  # noqa: F401
    CellResult,
    ExperimentConfig,
    MwscmError,
    OperationTaxonomy,
    ScenarioOutcome,
    ServiceDescription,
    TaskOrganizationDocument,
    TypePath,
    VendorCatalog,
    experiment_providers_csv,
    experiment_tasks_csv,
    is_subtype,
    normalize,
    parse_service_description,
    parse_task_document,
    parse_taxonomy,
    run_experiment_cell,
    run_scenario,
    serialize_service_description,
    serialize_task_document,
    serialize_taxonomy,
    vendor_match,
)

__all__ = [
    "CellResult",
    "ExperimentConfig",
    "MwscmError",
    "OperationTaxonomy",
    "ScenarioOutcome",
    "ServiceDescription",
    "TaskOrganizationDocument",
    "TypePath",
    "VendorCatalog",
    "experiment_providers_csv",
    "experiment_tasks_csv",
    "is_subtype",
    "normalize",
    "parse_service_description",
    "parse_task_document",
    "parse_taxonomy",
    "run_experiment_cell",
    "run_scenario",
    "serialize_service_description",
    "serialize_task_document",
    "serialize_taxonomy",
    "vendor_match",
]
