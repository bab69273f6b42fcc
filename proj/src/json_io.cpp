#include "tanglekit/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tanglekit/splines.hpp"

namespace tanglekit::json_io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw std::runtime_error(path + ": " + message);
}

json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) fail(path, "read failure");
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        fail(path, e.what());
    }
}

void write_file(const json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << doc.dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error(path + ": write failure");
}

const json& member(const json& j, const char* key, const std::string& path,
                   const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        fail(path, where + " is missing key \"" + key + "\"");
    return j.at(key);
}

double number_at(const json& j, const std::string& path,
                 const std::string& where) {
    if (!j.is_number()) fail(path, where + " must be a number");
    return j.get<double>();
}

int int_at(const json& j, const std::string& path, const std::string& where) {
    if (!j.is_number_integer()) fail(path, where + " must be an integer");
    return j.get<int>();
}

json points_to_json(const std::vector<Vec2>& points) {
    json arr = json::array();
    for (const Vec2& p : points) arr.push_back(json::array({p.x, p.y}));
    return arr;
}

std::vector<Vec2> points_from_json(const json& j, const std::string& path,
                                   const std::string& where) {
    if (!j.is_array()) fail(path, where + " must be an array of [x,y] pairs");
    std::vector<Vec2> points;
    points.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& p = j[i];
        if (!p.is_array() || p.size() != 2)
            fail(path, where + "[" + std::to_string(i) +
                           "] must be an [x,y] pair");
        points.push_back({number_at(p[0], path, where + ".x"),
                          number_at(p[1], path, where + ".y")});
    }
    return points;
}

}  // namespace

void write_scene(const wormsim::Scene& scene, const std::string& path) {
    json worms = json::array();
    for (const wormsim::WormTrack& worm : scene.worms) {
        json frames = json::array();
        for (const wormsim::WormState& state : worm.states) {
            frames.push_back({{"t", state.t},
                              {"points", points_to_json(state.spline.points)}});
        }
        worms.push_back({{"id", worm.identity}, {"frames", std::move(frames)}});
    }
    json doc = {{"size", {scene.height, scene.width}},
                {"dt", scene.dt},
                {"density", scene.density},
                {"mm_per_px", scene.mm_per_px},
                {"worms", std::move(worms)}};
    write_file(doc, path);
}

wormsim::Scene read_scene(const std::string& path) {
    const json doc = parse_file(path);
    wormsim::Scene scene;

    const json& size = member(doc, "size", path, "document");
    if (!size.is_array() || size.size() != 2)
        fail(path, "\"size\" must be [height, width]");
    scene.height = int_at(size[0], path, "size[0]");
    scene.width = int_at(size[1], path, "size[1]");
    scene.dt = number_at(member(doc, "dt", path, "document"), path, "dt");
    scene.mm_per_px = number_at(member(doc, "mm_per_px", path, "document"),
                                path, "mm_per_px");
    if (doc.contains("density"))
        scene.density = number_at(doc.at("density"), path, "density");

    const json& worms = member(doc, "worms", path, "document");
    if (!worms.is_array()) fail(path, "\"worms\" must be an array");
    std::size_t n_frames = 0;
    for (std::size_t w = 0; w < worms.size(); ++w) {
        const std::string where = "worms[" + std::to_string(w) + "]";
        wormsim::WormTrack worm;
        worm.identity = int_at(member(worms[w], "id", path, where), path,
                               where + ".id");
        const json& frames = member(worms[w], "frames", path, where);
        if (!frames.is_array()) fail(path, where + ".frames must be an array");
        for (std::size_t f = 0; f < frames.size(); ++f) {
            const std::string fw = where + ".frames[" + std::to_string(f) + "]";
            wormsim::WormState state;
            state.t = number_at(member(frames[f], "t", path, fw), path,
                                fw + ".t");
            state.spline.points = points_from_json(
                member(frames[f], "points", path, fw), path, fw + ".points");
            state.x_com = wormsim::arc_centroid(state.spline);
            worm.states.push_back(std::move(state));
        }
        if (w == 0) {
            n_frames = worm.states.size();
        } else if (worm.states.size() != n_frames) {
            fail(path, where + " has " + std::to_string(worm.states.size()) +
                           " frames, expected " + std::to_string(n_frames));
        }
        scene.worms.push_back(std::move(worm));
    }
    return scene;
}

void write_detections(const std::vector<FrameDetections>& frames,
                      const std::string& path) {
    json out_frames = json::array();
    for (const FrameDetections& frame : frames) {
        json accepted = json::array();
        for (const detect::Candidate& c : frame.accepted) {
            accepted.push_back(
                {{"score", c.score},
                 {"x0", {c.x0().x, c.x0().y}},
                 {"past", points_to_json(c.triplet.past.points)},
                 {"present", points_to_json(c.triplet.present.points)},
                 {"future", points_to_json(c.triplet.future.points)},
                 {"latent", c.latent}});
        }
        out_frames.push_back(
            {{"index", frame.index}, {"accepted", std::move(accepted)}});
    }
    json doc = {{"frames", std::move(out_frames)}};
    write_file(doc, path);
}

std::vector<FrameDetections> read_detections(const std::string& path) {
    const json doc = parse_file(path);
    const json& frames = member(doc, "frames", path, "document");
    if (!frames.is_array()) fail(path, "\"frames\" must be an array");

    std::vector<FrameDetections> out;
    out.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const std::string where = "frames[" + std::to_string(f) + "]";
        FrameDetections frame;
        frame.index = int_at(member(frames[f], "index", path, where), path,
                             where + ".index");
        const json& accepted = member(frames[f], "accepted", path, where);
        if (!accepted.is_array())
            fail(path, where + ".accepted must be an array");
        for (std::size_t i = 0; i < accepted.size(); ++i) {
            const std::string cw =
                where + ".accepted[" + std::to_string(i) + "]";
            const json& cj = accepted[i];
            detect::Candidate c;
            c.score = number_at(member(cj, "score", path, cw), path,
                                cw + ".score");
            c.triplet.past.points = points_from_json(
                member(cj, "past", path, cw), path, cw + ".past");
            c.triplet.present.points = points_from_json(
                member(cj, "present", path, cw), path, cw + ".present");
            c.triplet.future.points = points_from_json(
                member(cj, "future", path, cw), path, cw + ".future");
            const json& latent = member(cj, "latent", path, cw);
            if (!latent.is_array())
                fail(path, cw + ".latent must be an array");
            for (std::size_t d = 0; d < latent.size(); ++d)
                c.latent.push_back(
                    number_at(latent[d], path, cw + ".latent"));
            const json& x0 = member(cj, "x0", path, cw);
            if (!x0.is_array() || x0.size() != 2)
                fail(path, cw + ".x0 must be an [x,y] pair");
            // The stored x0 duplicates the present centroid; offsets are
            // recomputed from geometry so the two cannot drift apart.
            c.descriptors[0].offset = c.triplet.past.centroid();
            c.descriptors[1].offset = c.triplet.present.centroid();
            c.descriptors[2].offset = c.triplet.future.centroid();
            frame.accepted.push_back(std::move(c));
        }
        out.push_back(std::move(frame));
    }
    return out;
}

void write_tracks(const std::vector<track::Track>& tracks,
                  const std::string& path) {
    json out_tracks = json::array();
    for (const track::Track& t : tracks) {
        json frames = json::array();
        json splines = json::array();
        for (const track::Detection& det : t.detections) {
            frames.push_back(det.frame);
            splines.push_back(points_to_json(det.triplet.present.points));
        }
        out_tracks.push_back({{"id", t.id},
                              {"frames", std::move(frames)},
                              {"splines", std::move(splines)}});
    }
    json doc = {{"tracks", std::move(out_tracks)}};
    write_file(doc, path);
}

std::vector<track::Track> read_tracks(const std::string& path) {
    const json doc = parse_file(path);
    const json& tracks = member(doc, "tracks", path, "document");
    if (!tracks.is_array()) fail(path, "\"tracks\" must be an array");

    std::vector<track::Track> out;
    out.reserve(tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const std::string where = "tracks[" + std::to_string(i) + "]";
        track::Track t;
        t.id = int_at(member(tracks[i], "id", path, where), path,
                      where + ".id");
        const json& frames = member(tracks[i], "frames", path, where);
        const json& splines = member(tracks[i], "splines", path, where);
        if (!frames.is_array() || !splines.is_array())
            fail(path, where + ".frames and .splines must be arrays");
        if (frames.size() != splines.size())
            fail(path, where + ": frames and splines lengths differ");
        for (std::size_t f = 0; f < frames.size(); ++f) {
            track::Detection det;
            det.frame = int_at(frames[f], path, where + ".frames");
            det.triplet.present.points = points_from_json(
                splines[f], path,
                where + ".splines[" + std::to_string(f) + "]");
            det.identity = t.id;
            t.detections.push_back(std::move(det));
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace tanglekit::json_io
