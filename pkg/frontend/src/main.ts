import { ApiClient } from "./api.js";
import { RetrofitApp } from "./app.js";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app element");
}
const app = new RetrofitApp(root, new ApiClient(""));
void app.start();
