#pragma once

#include <string>
#include <vector>

#include "tanglekit/detect.hpp"
#include "tanglekit/track.hpp"
#include "tanglekit/wormsim.hpp"

namespace tanglekit::json_io {

// Accepted candidates of one frame, as stored in detections files.
struct FrameDetections {
    int index = 0;
    std::vector<detect::Candidate> accepted;
};

// Scene files:
//   {"size":[H,W],"dt":s,"density":f,"mm_per_px":f,
//    "worms":[{"id":int,"frames":[{"t":f,"points":[[x,y],...]}]}]}
// Only observable geometry is serialized: the internal heading angle is not
// part of the format, so reloaded scenes carry gamma = 0 and recover the
// centre of mass from the arc-length centroid of the stored points (exact,
// because emitted splines are centred that way).
void write_scene(const wormsim::Scene& scene, const std::string& path);
wormsim::Scene read_scene(const std::string& path);

// Detection files:
//   {"frames":[{"index":int,"accepted":[{"score":f,"x0":[x,y],
//     "past":[[x,y],...],"present":[...],"future":[...],"latent":[f,...]}]}]}
// Basis coordinates are not serialized; reloaded candidates carry empty
// eigenvalue vectors and descriptor offsets recomputed from the splines.
void write_detections(const std::vector<FrameDetections>& frames,
                      const std::string& path);
std::vector<FrameDetections> read_detections(const std::string& path);

// Track files:
//   {"tracks":[{"id":int,"frames":[int,...],"splines":[[[x,y],...],...]}]}
// One spline (the present-frame one) per listed frame.  Reloaded tracks
// carry empty past/future neighbour splines.
void write_tracks(const std::vector<track::Track>& tracks,
                  const std::string& path);
std::vector<track::Track> read_tracks(const std::string& path);

}  // namespace tanglekit::json_io
