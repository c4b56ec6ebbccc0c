import { ApiClient } from "./api.js";
import { bootApp } from "./app.js";
import { defaultStorage, DraftStore } from "./drafts.js";

const root = document.getElementById("app");
if (root) {
  void bootApp(root, new ApiClient(), new DraftStore(defaultStorage()));
}
