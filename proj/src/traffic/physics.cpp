#include "traffic/physics.hpp"

namespace hare::traffic {

double road_speed(double cars, double capacity, double max_speed) {
    return road_speed_as<double>(cars, capacity, max_speed);
}

double road_flow(double cars, double capacity, double max_speed, double length) {
    return cars * road_speed(cars, capacity, max_speed) / length;
}

}  // namespace hare::traffic
