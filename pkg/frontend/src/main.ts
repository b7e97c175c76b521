import "./styles.css";
import { ApiClient } from "./api";
import { Screen, SessionFlow, systemClock } from "./flow";
import { mountUi, UiHandles } from "./ui";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

let ui: UiHandles | null = null;
const api = new ApiClient(""); // same origin: served by the assessment service
const flow = new SessionFlow(api, systemClock, (screen: Screen) => ui?.render(screen));
ui = mountUi(root, flow);
ui.render(flow.current);
