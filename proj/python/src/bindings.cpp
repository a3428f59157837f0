#include "modelsync/export.hpp"
#include "modelsync/harness.hpp"
#include "modelsync/history.hpp"
#include "modelsync/metrics.hpp"
#include "modelsync/operation.hpp"
#include "modelsync/recognizer.hpp"
#include "modelsync/snapshot.hpp"
#include "modelsync/sync.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace modelsync;
using nlohmann::json;

namespace {

using PyPoint = std::pair<double, double>;
using PyRect = std::tuple<double, double, double, double>;
using PyRgb = std::tuple<int, int, int>;

std::vector<Point> to_points(const std::vector<PyPoint>& in) {
    std::vector<Point> out;
    out.reserve(in.size());
    for (const auto& [x, y] : in) out.push_back({x, y});
    return out;
}

std::vector<PyPoint> from_points(const std::vector<Point>& in) {
    std::vector<PyPoint> out;
    out.reserve(in.size());
    for (const auto& p : in) out.emplace_back(p.x, p.y);
    return out;
}

PyRect from_rect(Rect r) { return {r.x, r.y, r.w, r.h}; }

LayerSet to_layer(const std::set<std::string>& ids) {
    LayerSet l;
    for (const auto& id : ids) l.ids.insert(ElementId{id});
    return l;
}

std::set<std::string> from_layer(const LayerSet& l) {
    std::set<std::string> out;
    for (const auto& id : l.ids) out.insert(id.str());
    return out;
}

py::dict classify(const std::vector<PyPoint>& points, const std::vector<std::pair<std::string, PyRect>>& classes) {
    std::vector<ClassFootprint> fp;
    for (const auto& [id, r] : classes) {
        fp.push_back({ElementId{id}, {std::get<0>(r), std::get<1>(r), std::get<2>(r), std::get<3>(r)}});
    }
    const auto resampled = resample_stroke(to_points(points));
    const auto result = classify_stroke(resampled, fp);
    py::dict d;
    if (const auto* c = std::get_if<recognition::ClassShape>(&result)) {
        d["kind"] = "class";
        d["bounds"] = from_rect(c->bounds);
    } else if (const auto* r = std::get_if<recognition::RelationshipLine>(&result)) {
        d["kind"] = "relationship";
        d["source"] = r->source.str();
        d["target"] = r->target.str();
        d["waypoints"] = from_points(r->waypoints);
    } else {
        d["kind"] = "sketch";
    }
    return d;
}

// Applies wire-format op bodies to a local document.
class PyDocument {
public:
    explicit PyDocument(std::string doc_id) : doc_(std::move(doc_id)) {}
    explicit PyDocument(ModelDocument doc) : doc_(std::move(doc)) {}

    std::string apply(const std::string& body_text, const std::string& actor, Millis now) {
        const auto outcome = apply_body(doc_, body_from_json(json::parse(body_text)), ActorId{actor}, now);
        json j{{"ok", outcome.ok}, {"created", json::array()}, {"removed", json::array()}};
        for (const auto& id : outcome.created) j["created"].push_back(id.str());
        for (const auto& id : outcome.removed) j["removed"].push_back(id.str());
        if (outcome.error) {
            j["error"] = std::string(error_code_name(*outcome.error));
            j["diagnostic"] = outcome.diagnostic;
        }
        return j.dump();
    }

    std::string to_json() const { return document_to_json(doc_).dump(); }
    std::string digest() const { return state_digest(doc_); }
    std::string plantuml() const { return to_plantuml(doc_); }
    std::vector<std::string> integrity_problems() const { return doc_.integrity_problems(); }
    std::string doc_id() const { return doc_.doc_id(); }

private:
    ModelDocument doc_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the modelsync collaborative class-diagram engine";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result(
        [&] { return py::object(py::exception<Error>(m, "ModelsyncError", PyExc_RuntimeError)); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto& type = error_type.get_stored();
            py::object exc = type(py::str(e.what()));
            exc.attr("code") = std::string(error_code_name(e.code()));
            PyErr_SetObject(type.ptr(), exc.ptr());
        } catch (const json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("resample", [](const std::vector<PyPoint>& pts) { return from_points(resample_stroke(to_points(pts))); },
          py::arg("points"));
    m.def("classify", &classify, py::arg("points"), py::arg("classes"));

    m.def(
        "fade_color",
        [](PyRgb c, Millis last_edit, Millis now, Millis fade) {
            const auto out = fade_color({std::get<0>(c), std::get<1>(c), std::get<2>(c)}, last_edit, now, fade);
            return PyRgb{out.r, out.g, out.b};
        },
        py::arg("color"), py::arg("last_edit"), py::arg("now"), py::arg("fade") = kDefaultFadeMillis);
    m.def("default_palette", [] {
        std::vector<PyRgb> out;
        for (const auto& c : default_palette()) out.emplace_back(c.r, c.g, c.b);
        return out;
    });

    m.def("layer_add", [](const std::set<std::string>& a, const std::set<std::string>& b) {
        return from_layer(layer_add(to_layer(a), to_layer(b)));
    });
    m.def("layer_subtract", [](const std::set<std::string>& a, const std::set<std::string>& b) {
        return from_layer(layer_subtract(to_layer(a), to_layer(b)));
    });

    m.def("sus_score", [](const std::vector<int>& a) { return sus_score(a); }, py::arg("answers"));
    m.def("tlx_raw", [](const std::vector<double>& v) { return tlx_raw(v); }, py::arg("subscales"));

    py::class_<PyDocument>(m, "Document")
        .def(py::init<std::string>(), py::arg("doc_id") = "doc")
        .def_static("from_json", [](const std::string& text) { return PyDocument(document_from_json(json::parse(text))); })
        .def("apply", &PyDocument::apply, py::arg("body"), py::arg("actor"), py::arg("now"))
        .def("to_json", &PyDocument::to_json)
        .def("digest", &PyDocument::digest)
        .def("plantuml", &PyDocument::plantuml)
        .def("integrity_problems", &PyDocument::integrity_problems)
        .def_property_readonly("doc_id", &PyDocument::doc_id);

    m.def(
        "replay",
        [](const std::string& ndjson, const std::string& doc_id) {
            return document_to_json(replay(oplog_from_ndjson(ndjson), ModelDocument(doc_id))).dump();
        },
        py::arg("oplog"), py::arg("doc_id") = "doc");

    m.def(
        "random_scenario",
        [](std::size_t clients, std::size_t ops, Millis latency, Millis jitter, bool duplicate, std::uint64_t seed) {
            return scenario_to_json(random_scenario(clients, ops, {latency, jitter, duplicate}, seed)).dump();
        },
        py::arg("clients"), py::arg("ops"), py::arg("latency_ms") = 250, py::arg("jitter_ms") = 100,
        py::arg("duplicate") = false, py::arg("seed") = 42);
    m.def(
        "run_scenario",
        [](const std::string& scenario) {
            const auto sc = scenario_from_json(json::parse(scenario));
            py::gil_scoped_release release;
            return report_to_json(run_scenario(sc)).dump();
        },
        py::arg("scenario"));
}
