#pragma once

#include <array>
#include <string>

// The sixteen training-task plans in the primitive DSL, one per task family
// variation, used as the parser/validator corpus.
namespace testutil {

inline const std::array<std::string, 16>& training_plans() {
  static const std::array<std::string, 16> plans = {
      "# query: push the maroon button.\n"
      "button = push_down(object=\"maroon button\")\n",

      "# query: close fridge.\n"
      "fridge_door = push_forward(object=\"fridge door\")\n",

      "# query: close laptop lid.\n"
      "laptop_lid = grasp(object=\"laptop lid\")\n"
      "laptop_lid = move_grasped_object(target=\"down\")\n"
      "release()\n",

      "# query: close microwave.\n"
      "microwave_door = push_forward(object=\"microwave door\")\n",

      "# query: open the door.\n"
      "door_handle = grasp(object=\"door handle\")\n"
      "door_handle = rotate_grasped_object()\n"
      "door_handle = push_forward(object=door_handle)\n",

      "# query: open box.\n"
      "box_lid = grasp(object=\"box lid\")\n"
      "box_lid = move_grasped_object(target=\"up\")\n"
      "release()\n",

      "# query: open bottom drawer.\n"
      "bottom_handle = grasp(object=\"bottom drawer handle\")\n"
      "bottom_handle = move_grasped_object(target=\"out\")\n"
      "release()\n",

      "# query: lift the cyan block up to the target.\n"
      "cyan_cube = grasp(object=\"cyan cube\")\n"
      "cyan_cube = move_grasped_object(target=\"red ball\")\n",

      "# query: lift the orange cup.\n"
      "orange_cup = grasp(object=\"orange cup\")\n"
      "orange_cup = move_grasped_object(target=\"up\")\n",

      "# query: pick up and set down 2 purple blocks on top of each other.\n"
      "purple_cube_1 = grasp(object=\"purple cube\")\n"
      "purple_cube_1 = move_grasped_object(target=\"green square\")\n"
      "release()\n"
      "purple_cube_2 = grasp(object=\"purple cube\", not=[purple_cube_1])\n"
      "purple_cube_2 = move_grasped_object(target=purple_cube_1)\n"
      "release()\n",

      "# query: put the crackers box in the cupboard.\n"
      "crackers_box = grasp(object=\"crakers box\")\n"
      "crackers_box = move_grasped_object(target=\"cupboard\")\n"
      "release()\n",

      "# query: leave the money on the middle shelf on the safe.\n"
      "money = grasp(object=\"money\")\n"
      "money = move_grasped_object(target=\"middle shelf\")\n"
      "release()\n",

      "# query: push the block until it is sitting on top of the green target.\n"
      "cube = push_forward(object=\"red cube\", target=\"green square\")\n",

      "# query: use the stick to drag the cube onto the teal target.\n"
      "stick = grasp(object=\"stick\")\n"
      "cube = push_forward(object=\"gray cube\", target=\"teal square\")\n",

      "# query: screw on the violet jar lid.\n"
      "lid = grasp(object=\"gray lid\")\n"
      "lid = move_grasped_object(target=\"violet jar\")\n"
      "lid = rotate_grasped_object()\n"
      "release()\n",

      "# query: screw in the white light bulb.\n"
      "bulb = grasp(object=\"white light bulb\")\n"
      "bulb = move_grasped_object(target=\"brown lamp\")\n"
      "bulb = rotate_grasped_object()\n"
      "release()\n",
  };
  return plans;
}

}  // namespace testutil
