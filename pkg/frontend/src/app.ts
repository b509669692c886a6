import { TaskApiClient } from "./api.js";
import { renderSession } from "./render.js";
import { WorkerSession } from "./session.js";

const DEFAULT_SERVICE = "http://127.0.0.1:8765";

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? DEFAULT_SERVICE;
}

function mount(root: HTMLElement): void {
  const storedWorker = window.sessionStorage.getItem("worker_id") ?? "";
  root.innerHTML = `<form id="login">
    <label>Worker id <input id="worker" value="${storedWorker}" placeholder="e.g. alice"></label>
    <button id="start" type="submit" ${storedWorker ? "" : "disabled"}>Start answering</button>
  </form>
  <div id="task"></div>`;

  const workerInput = root.querySelector<HTMLInputElement>("#worker")!;
  const startButton = root.querySelector<HTMLButtonElement>("#start")!;
  workerInput.addEventListener("input", () => {
    startButton.disabled = workerInput.value.trim() === "";
  });

  root.querySelector<HTMLFormElement>("#login")!.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const workerId = workerInput.value.trim();
    if (!workerId) return;
    window.sessionStorage.setItem("worker_id", workerId);
    const session = new WorkerSession(new TaskApiClient(serviceUrl()), workerId);
    const task = root.querySelector<HTMLElement>("#task")!;
    (root.querySelector("#login") as HTMLElement).hidden = true;

    const redraw = () => {
      task.innerHTML = renderSession(session);
      task
        .querySelectorAll<HTMLInputElement>("input[data-instance]")
        .forEach((box) =>
          box.addEventListener("change", () => session.toggleInstance(box.dataset.instance!)),
        );
      task
        .querySelectorAll<HTMLInputElement>("input[data-property]")
        .forEach((box) =>
          box.addEventListener("change", () => session.toggleProperty(box.dataset.property!)),
        );
      task.querySelector("#submit")?.addEventListener("click", () => {
        void session.submit().then(redraw);
      });
      task.querySelector("#retry")?.addEventListener("click", () => {
        void session.loadNext().then(redraw);
      });
    };

    void session.loadNext().then(redraw);
  });
}

mount(document.getElementById("app")!);
