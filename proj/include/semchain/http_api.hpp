#pragma once

#include <memory>
#include <string>
#include <thread>

#include "semchain/orchestrator.hpp"

namespace httplib {
class Server;
}

namespace semchain {

// Registers the JSON routes:
//   POST /experiments          plan JSON -> {plan_id, game_ids}
//   POST /join                 {participant_id, plan_id?} -> {token, round, observation}
//   GET  /observation?token=   -> {observation}
//   POST /guess                {token, guess, turn?} -> {score, round_complete, advice_due, finished, observation}
//   POST /advice               {token, advice} -> {ok}
//   GET  /progress?plan_id=    -> plan summary
//   GET  /logs/{game_id}       -> JSON Lines
// Errors are {code, message} with a 4xx status.
void mount_api(httplib::Server& server, Orchestrator& orchestrator);

// Owns an httplib server running on a background thread.
class ApiServer {
public:
    explicit ApiServer(Orchestrator& orchestrator);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Binds (port 0 picks a free port) and starts serving; returns the port.
    int start(const std::string& host, int port);
    // Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace semchain
