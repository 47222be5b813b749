// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "service.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "avatar/error.hpp"
#include "avatar/pose_io.hpp"
#include "httplib.h"
#include "json.hpp"
#include "zip.hpp"

namespace avatar::app {
namespace {

using nlohmann::json;

struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, {{"error", message}}, status);
}

json parse_body(const httplib::Request& req) {
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw BadRequest(std::string("malformed JSON: ") + e.what());
  }
}

std::optional<std::uint64_t> expected_revision(const json& body) {
  if (!body.contains("expected_revision")) return std::nullopt;
  const auto& v = body.at("expected_revision");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw BadRequest("expected_revision must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

int int_param(const httplib::Request& req, const char* name, int fallback, int lo, int hi) {
  if (!req.has_param(name)) return fallback;
  const std::string text = req.get_param_value(name);
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw BadRequest(std::string("query parameter '") + name + "' must be an integer");
  }
  if (used != text.size() || value < lo || value > hi) {
    throw BadRequest(std::string("query parameter '") + name + "' must lie in [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
  }
  return value;
}

double double_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw BadRequest(std::string("missing query parameter '") + name + "'");
  const std::string text = req.get_param_value(name);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw BadRequest(std::string("query parameter '") + name + "' must be a number");
  }
  return value;
}

json state_json(const SessionState& s) {
  json bg = {s.background.x(), s.background.y(), s.background.z()};
  json pose = json::parse(pose_to_json(s.pose));
  pose["joint_names"] = s.avatar.body_template->joint_names;
  return {{"pose", pose},
          {"beta", s.beta},
          {"camera", json::parse(camera_to_json(s.camera))},
          {"background", bg},
          {"revision", s.revision}};
}

// Either a full camera object or an orbit {azimuth, elevation, radius, target}
// in degrees and meters that keeps the current intrinsics.
Camera camera_from_body(const json& body, const Camera& current) {
  if (body.contains("world_to_cam")) return camera_from_json(body.dump());
  if (!body.contains("azimuth")) throw BadRequest("camera body needs world_to_cam or azimuth/elevation/radius");
  const double az = body.at("azimuth").get<double>() * std::numbers::pi / 180.0;
  const double el = body.value("elevation", 0.0) * std::numbers::pi / 180.0;
  const double radius = body.at("radius").get<double>();
  const auto t = body.value("target", std::vector<double>{0.0, 0.0, 0.0});
  if (t.size() != 3 || !(radius > 0.0)) throw BadRequest("orbit needs a positive radius and a 3-element target");
  const Eigen::Vector3d target(t[0], t[1], t[2]);
  const Eigen::Vector3d eye =
      target + radius * Eigen::Vector3d(std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el));
  Intrinsics k;
  k.fx = current.fx;
  k.fy = current.fy;
  k.cx = current.cx;
  k.cy = current.cy;
  k.width = current.width;
  k.height = current.height;
  k.near = current.near;
  return look_at(eye, target, Eigen::Vector3d::UnitY(), k);
}

template <class Handler>
httplib::Server::Handler guarded(Handler&& handler) {
  return [handler = std::forward<Handler>(handler)](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const BadRequest& e) {
      send_error(res, 400, e.what());
    } catch (const RevisionConflict& e) {
      send_json(res, {{"error", e.what()}, {"revision", e.current()}}, 409);
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed body: ") + e.what());
    } catch (const Error& e) {
      const bool client = e.code() != ErrorCode::InvariantViolation && e.code() != ErrorCode::NonFiniteLoss;
      send_error(res, client ? 400 : 500, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

std::filesystem::path default_ui_dir() { return AVATAR_UI_DIR; }

std::unique_ptr<httplib::Server> make_server(std::shared_ptr<AvatarSession> session,
                                             const std::filesystem::path& ui_dir) {
  auto server = std::make_unique<httplib::Server>();
  auto& srv = *server;

  srv.Get("/v1/state", guarded([session](const httplib::Request&, httplib::Response& res) {
            send_json(res, state_json(*session->snapshot()));
          }));

  srv.Get("/v1/joints", guarded([session](const httplib::Request&, httplib::Response& res) {
            const auto& tpl = *session->snapshot()->avatar.body_template;
            send_json(res, {{"names", tpl.joint_names}, {"parents", tpl.parents}});
          }));

  srv.Put("/v1/pose", guarded([session](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            const auto expected = expected_revision(body);
            const auto& tpl = *session->snapshot()->avatar.body_template;
            json frame = body;
            frame.erase("expected_revision");
            frame.erase("joint_names");
            json seq = {{"frames", json::array({frame})}};
            if (body.contains("joint_names")) seq["joint_names"] = body.at("joint_names");
            const Pose pose = parse_pose_sequence(seq.dump(), tpl).frames.front();
            send_json(res, {{"revision", session->set_pose(pose, expected)}});
          }));

  srv.Put("/v1/shape", guarded([session](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            const auto expected = expected_revision(body);
            const auto beta = body.at("beta").get<std::vector<double>>();
            for (double b : beta) {
              if (!std::isfinite(b)) throw BadRequest("beta must be finite");
            }
            send_json(res, {{"revision", session->set_shape(beta, expected)}});
          }));

  srv.Put("/v1/camera", guarded([session](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            const auto expected = expected_revision(body);
            const Camera camera = camera_from_body(body, session->snapshot()->camera);
            send_json(res, {{"revision", session->set_camera(camera, expected)}});
          }));

  srv.Post("/v1/texture/patch", guarded([session](const httplib::Request& req, httplib::Response& res) {
             TexturePatch patch;
             patch.rect = {double_param(req, "u0"), double_param(req, "v0"), double_param(req, "u1"),
                           double_param(req, "v1")};
             const auto* bytes = reinterpret_cast<const std::uint8_t*>(req.body.data());
             patch.pixels = decode_png_rgba({bytes, req.body.size()});
             std::optional<std::uint64_t> expected;
             if (req.has_param("expected_revision")) {
               expected = static_cast<std::uint64_t>(
                   int_param(req, "expected_revision", 0, 0, std::numeric_limits<int>::max()));
             }
             send_json(res, {{"revision", session->apply_patch(patch, expected)}});
           }));

  srv.Get("/v1/render", guarded([session](const httplib::Request& req, httplib::Response& res) {
            const auto snap = session->snapshot();
            const int w = int_param(req, "w", snap->camera.width, 1, kMaxServiceImageSide);
            const int h = int_param(req, "h", snap->camera.height, 1, kMaxServiceImageSide);
            const auto png = encode_png(render_snapshot(*snap, w, h));
            res.set_header("X-Revision", std::to_string(snap->revision));
            res.set_content(std::string(png.begin(), png.end()), "image/png");
          }));

  srv.Get("/v1/turntable", guarded([session](const httplib::Request& req, httplib::Response& res) {
            const auto snap = session->snapshot();
            const int n = int_param(req, "n", 24, 1, kMaxTurntableViews);
            const int w = int_param(req, "w", snap->camera.width, 1, kMaxServiceImageSide);
            const int h = int_param(req, "h", snap->camera.height, 1, kMaxServiceImageSide);
            std::vector<ZipEntry> entries;
            auto pngs = turntable_snapshot(*snap, n, w, h);
            for (std::size_t i = 0; i < pngs.size(); ++i) {
              char name[32];
              std::snprintf(name, sizeof name, "view_%03zu.png", i);
              entries.push_back({name, std::move(pngs[i])});
            }
            const auto zip = make_zip(entries);
            res.set_header("X-Revision", std::to_string(snap->revision));
            res.set_content(std::string(zip.begin(), zip.end()), "application/zip");
          }));

  if (std::filesystem::is_directory(ui_dir)) {
    srv.set_mount_point("/ui", ui_dir.string());
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
  }
  return server;
}

}  // namespace avatar::app
