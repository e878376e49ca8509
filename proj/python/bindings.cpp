#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mwscm/broker.hpp"
#include "mwscm/harness.hpp"
#include "mwscm/host.hpp"
#include "mwscm/provider.hpp"

namespace py = pybind11;
using namespace mwscm;

namespace {

ClientFormat format_from(const std::string& name) {
  auto format = client_format_from_name(name);
  if (!format) throw Error(ErrorCode::MalformedPayload, "unknown format '" + name + "'");
  return *format;
}

}  // namespace

PYBIND11_MODULE(_mwscm, m) {
  m.doc() = "Mobile Web service composition mediator: documents, matching, "
            "simulation experiments and scenario runs";

  py::register_exception<Error>(m, "MwscmError");

  py::class_<TypePath>(m, "TypePath")
      .def(py::init([](const std::string& text) { return TypePath::parse(text); }))
      .def("__str__", &TypePath::str)
      .def("__repr__", [](const TypePath& p) { return "TypePath('" + p.str() + "')"; })
      .def("__eq__", [](const TypePath& a, const TypePath& b) { return a == b; });

  py::class_<OperationTaxonomy, std::shared_ptr<OperationTaxonomy>>(m, "OperationTaxonomy")
      .def_property_readonly("node_count", &OperationTaxonomy::node_count)
      .def("resolves",
           [](const OperationTaxonomy& tax, const std::string& path) {
             return tax.resolves(TypePath::parse(path));
           });

  m.def("parse_taxonomy", [](const std::string& document) {
    return std::make_shared<OperationTaxonomy>(parse_taxonomy(document));
  });
  m.def("serialize_taxonomy",
        [](const OperationTaxonomy& tax) { return serialize_taxonomy(tax); });
  m.def(
      "is_subtype",
      [](const std::string& candidate, const std::string& requested,
         const OperationTaxonomy& tax) {
        return is_subtype(TypePath::parse(candidate), TypePath::parse(requested), tax);
      },
      py::arg("candidate"), py::arg("requested"), py::arg("taxonomy"));

  py::class_<ServiceDescription>(m, "ServiceDescription")
      .def_readonly("service_name", &ServiceDescription::service_name)
      .def_property_readonly("service_type",
                             [](const ServiceDescription& d) { return d.service_type.str(); })
      .def_property_readonly("endpoint",
                             [](const ServiceDescription& d) { return d.endpoint.str(); })
      .def_property_readonly("operations", [](const ServiceDescription& d) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& op : d.operations) out.emplace_back(op.name, op.op_type.str());
        return out;
      });

  m.def("parse_service_description",
        [](const std::string& document, const OperationTaxonomy& tax) {
          return parse_service_description(document, tax);
        });
  m.def("serialize_service_description", &serialize_service_description);

  py::class_<TaskOrganizationDocument>(m, "TaskOrganizationDocument")
      .def_readonly("request_type", &TaskOrganizationDocument::request_type)
      .def_property_readonly("task_ids", [](const TaskOrganizationDocument& d) {
        std::vector<std::string> out;
        for (const auto& task : d.tasks) out.push_back(task.task_id);
        return out;
      });

  m.def("parse_task_document", [](const std::string& document, const OperationTaxonomy& tax) {
    return parse_task_document(document, tax);
  });
  m.def("serialize_task_document", &serialize_task_document);

  m.def(
      "normalize",
      [](const std::string& raw, const std::string& format) {
        NormalizedRequest req = normalize(raw, format_from(format));
        py::dict out;
        out["type"] = req.request_type;
        py::dict params;
        for (const auto& [key, value] : req.params) params[py::str(key)] = value;
        out["params"] = params;
        return out;
      },
      py::arg("raw"), py::arg("format"));

  py::class_<VendorCatalog>(m, "VendorCatalog")
      .def(py::init([](std::vector<std::string> items, std::vector<std::string> genres,
                       std::vector<std::string> trading_times) {
             return VendorCatalog{std::move(items), std::move(genres), std::move(trading_times)};
           }),
           py::arg("items") = std::vector<std::string>{},
           py::arg("genres") = std::vector<std::string>{},
           py::arg("trading_times") = std::vector<std::string>{});
  m.def("vendor_match", &vendor_match, py::arg("catalog"), py::arg("genre"),
        py::arg("trading_time"));

  py::class_<ScenarioOutcome>(m, "ScenarioOutcome")
      .def_readonly("exit_code", &ScenarioOutcome::exit_code)
      .def_readonly("responses", &ScenarioOutcome::responses)
      .def_readonly("trace_csv", &ScenarioOutcome::trace_csv);

  m.def(
      "run_scenario",
      [](const std::filesystem::path& path) { return run_scenario_file(path); },
      py::arg("path"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("providers", &ExperimentConfig::providers)
      .def_readwrite("tasks", &ExperimentConfig::tasks)
      .def_readwrite("cache_fractions", &ExperimentConfig::cache_fractions)
      .def_readwrite("repetitions", &ExperimentConfig::repetitions)
      .def_readwrite("seed", &ExperimentConfig::seed);

  py::class_<CellResult>(m, "CellResult")
      .def_readonly("mean_ms", &CellResult::mean_ms)
      .def_readonly("stddev_ms", &CellResult::stddev_ms);

  m.def("run_experiment_cell", &run_experiment_cell, py::arg("config"), py::arg("providers"),
        py::arg("tasks"), py::arg("fraction"));
  m.def("experiment_providers_csv", &experiment_providers_csv, py::arg("config"),
        py::arg("n_values"));
  m.def("experiment_tasks_csv", &experiment_tasks_csv, py::arg("config"), py::arg("t_values"));
}
