import { ApiClient } from "./api.js";
import { AnnotatorApp } from "./app.js";

/** Browser bootstrap: ?session=<id>&api=<base-url> (api defaults to same origin). */
function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const apiBase = params.get("api") ?? window.location.origin;
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");

  const app = new AnnotatorApp({
    api: new ApiClient(apiBase),
    storage: window.localStorage,
    root,
  });

  const sessionId = params.get("session");
  const form = document.getElementById("session-form") as HTMLFormElement | null;
  const input = document.getElementById("session-input") as HTMLInputElement | null;
  if (form && input) {
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      if (input.value.trim()) void app.start(input.value.trim());
    });
    if (sessionId) {
      input.value = sessionId;
    }
  }
  if (sessionId) void app.start(sessionId);
}

boot();
