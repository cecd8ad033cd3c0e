#include "callgram/synth.hpp"

#include "callgram/error.hpp"
#include "callgram/hashing.hpp"
#include "callgram/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

namespace callgram {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

constexpr std::size_t max_pattern_arguments = 10;

CallPattern call(std::string category, std::string api, std::vector<std::string> args = {}) {
    return CallPattern{std::move(category), std::move(api), std::move(args), "0"};
}

void validate_placeholders(const std::string &pattern, const std::string &family) {
    std::size_t pos = 0;
    while ((pos = pattern.find('{', pos)) != std::string::npos) {
        const auto close = pattern.find('}', pos);
        if (close == std::string::npos) {
            throw Error{ErrorCode::BadTemplate, family + ": unterminated placeholder in \"" + pattern + "\""};
        }
        const std::string body = pattern.substr(pos + 1, close - pos - 1);
        if (body != "hex") {
            bool ok = body.size() > 2 && body.rfind("n:", 0) == 0;
            for (std::size_t i = 2; ok && i < body.size(); ++i) ok = std::isdigit(static_cast<unsigned char>(body[i])) != 0;
            if (!ok || std::stoull(body.substr(2)) == 0) {
                throw Error{ErrorCode::BadTemplate, family + ": unknown placeholder {" + body + "}"};
            }
        }
        pos = close + 1;
    }
}

void validate_call(const CallPattern &c, const std::string &family) {
    if (c.api.empty() || normalize_api_name(c.api) != c.api) {
        throw Error{ErrorCode::BadTemplate, family + ": api name must be non-empty without whitespace"};
    }
    if (c.arguments.size() > max_pattern_arguments) {
        throw Error{ErrorCode::BadTemplate, family + ": " + c.api + " has more than 10 arguments"};
    }
    for (const auto &a : c.arguments) validate_placeholders(a, family);
}

std::string instantiate(const std::string &pattern, SynthRng &rng) {
    std::string out;
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        const auto open = pattern.find('{', pos);
        if (open == std::string::npos) {
            out.append(pattern, pos, std::string::npos);
            break;
        }
        out.append(pattern, pos, open - pos);
        const auto close = pattern.find('}', open);
        const std::string body = pattern.substr(open + 1, close - open - 1);
        if (body == "hex") {
            out += hex8(static_cast<std::uint32_t>(rng.next() >> 32));
        } else {
            out += std::to_string(rng.below(std::stoull(body.substr(2))));
        }
        pos = close + 1;
    }
    return out;
}

ApiCallRecord instantiate(const CallPattern &p, SynthRng &rng) {
    ApiCallRecord r;
    r.category = p.category;
    r.api_name = p.api;
    r.return_value = p.return_value;
    for (const auto &a : p.arguments) r.arguments.push_back(instantiate(a, rng));
    return r;
}

CallPattern parse_call(const json &j, const std::string &family) {
    if (!j.is_object()) {
        throw Error{ErrorCode::BadTemplate, family + ": call entry must be an object"};
    }
    CallPattern c;
    try {
        c.api = j.at("api").get<std::string>();
        c.category = j.value("category", std::string{});
        if (j.contains("arguments")) c.arguments = j.at("arguments").get<std::vector<std::string>>();
        if (j.contains("return")) c.return_value = j.at("return").get<std::string>();
    } catch (const json::exception &e) {
        throw Error{ErrorCode::BadTemplate, family + ": " + e.what()};
    }
    return c;
}

ojson call_to_json(const CallPattern &c) {
    return ojson{{"api", c.api}, {"category", c.category}, {"arguments", c.arguments}, {"return", c.return_value}};
}

bool all_digits(const std::string &s) {
    return !s.empty() && s.size() < 19 &&
           std::all_of(s.begin(), s.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; }) &&
           (s.size() == 1 || s.front() != '0');
}

std::string lowercase(std::string s) {
    for (auto &ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::string report_json(const std::string &sample_id, const std::vector<ApiCallRecord> &calls) {
    ojson jcalls = ojson::array();
    for (const auto &c : calls) {
        ojson args = ojson::object();
        for (std::size_t i = 0; i < c.arguments.size(); ++i) args["a" + std::to_string(i)] = c.arguments[i];
        ojson ret = all_digits(c.return_value) ? ojson(std::stoull(c.return_value)) : ojson(c.return_value);
        jcalls.push_back(ojson{{"category", c.category}, {"api", c.api_name}, {"arguments", std::move(args)},
                               {"return", std::move(ret)}});
    }
    ojson doc;
    doc["info"] = {{"package", "exe"}, {"generator", "callgram-synth"}};
    doc["target"] = {{"file", {{"name", sample_id + ".exe"}}}};
    doc["behavior"] = {{"processes", ojson::array({ojson{{"pid", 1000},
                                                         {"process_name", sample_id + ".exe"},
                                                         {"calls", std::move(jcalls)}}})}};
    return doc.dump(1) + "\n";
}

}  // namespace

void FamilyTemplate::validate() const {
    if (class_name.empty()) {
        throw Error{ErrorCode::BadTemplate, "class_name must not be empty"};
    }
    for (char c : class_name) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '/' || c == '\\' || c == '"') {
            throw Error{ErrorCode::BadTemplate, "class_name \"" + class_name + "\" is not a plain identifier"};
        }
    }
    if (chain_motifs.empty()) {
        throw Error{ErrorCode::BadTemplate, class_name + ": chain_motifs must not be empty"};
    }
    for (const auto &m : chain_motifs) {
        if (m.empty()) throw Error{ErrorCode::BadTemplate, class_name + ": empty motif"};
        for (const auto &c : m) validate_call(c, class_name);
    }
    for (const auto &c : call_pool) validate_call(c, class_name);
    if (!(noise_rate >= 0.0 && noise_rate < 1.0)) {
        throw Error{ErrorCode::BadTemplate, class_name + ": noise_rate must lie in [0, 1)"};
    }
    if (min_motifs < 1 || max_motifs < min_motifs) {
        throw Error{ErrorCode::BadTemplate, class_name + ": need 1 <= min_motifs <= max_motifs"};
    }
}

FamilyTemplate parse_template(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception &e) {
        throw Error{ErrorCode::BadTemplate, e.what()};
    }
    if (!j.is_object()) {
        throw Error{ErrorCode::BadTemplate, "template must be a JSON object"};
    }
    FamilyTemplate t;
    try {
        t.class_name = j.at("class_name").get<std::string>();
        for (const auto &c : j.value("call_pool", json::array())) t.call_pool.push_back(parse_call(c, t.class_name));
        for (const auto &m : j.at("chain_motifs")) {
            if (!m.is_array()) throw Error{ErrorCode::BadTemplate, t.class_name + ": motif must be an array"};
            Motif motif;
            for (const auto &c : m) motif.push_back(parse_call(c, t.class_name));
            t.chain_motifs.push_back(std::move(motif));
        }
        t.noise_rate = j.at("noise_rate").get<double>();
        t.min_motifs = j.value("min_motifs", 1);
        t.max_motifs = j.value("max_motifs", t.min_motifs);
    } catch (const json::exception &e) {
        throw Error{ErrorCode::BadTemplate, e.what()};
    }
    t.validate();
    return t;
}

std::string dump_template(const FamilyTemplate &t) {
    ojson pool = ojson::array();
    for (const auto &c : t.call_pool) pool.push_back(call_to_json(c));
    ojson motifs = ojson::array();
    for (const auto &m : t.chain_motifs) {
        ojson jm = ojson::array();
        for (const auto &c : m) jm.push_back(call_to_json(c));
        motifs.push_back(std::move(jm));
    }
    ojson doc{{"class_name", t.class_name}, {"call_pool", std::move(pool)}, {"chain_motifs", std::move(motifs)},
              {"noise_rate", t.noise_rate}, {"min_motifs", t.min_motifs}, {"max_motifs", t.max_motifs}};
    return doc.dump(2) + "\n";
}

std::vector<FamilyTemplate> load_templates(const std::filesystem::path &path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw Error{ErrorCode::BadTemplate, path.string() + ": " + e.what()};
    }
    std::vector<FamilyTemplate> out;
    if (j.is_array()) {
        for (const auto &t : j) out.push_back(parse_template(t.dump()));
    } else {
        out.push_back(parse_template(text));
    }
    return out;
}

const std::vector<CallPattern> &benign_noise_pool() {
    static const std::vector<CallPattern> pool = {
        call("synchronization", "GetSystemTimeAsFileTime"),
        call("synchronization", "NtQuerySystemTime"),
        call("synchronization", "NtDelayExecution", {"{n:4}"}),
        call("synchronization", "GetLocalTime"),
        call("synchronization", "timeGetTime"),
        call("misc", "GetComputerNameW", {"DESKTOP-{n:3}"}),
        call("misc", "GetUserNameW", {"user{n:3}"}),
        call("misc", "GetTimeZoneInformation"),
        call("misc", "GetDiskFreeSpaceExW", {"C:\\"}),
        call("misc", "UuidCreate"),
        call("ui", "LoadStringW", {"{n:6}"}),
        call("ui", "GetForegroundWindow"),
        call("ui", "FindWindowW", {"Shell_TrayWnd"}),
        call("ui", "DrawTextExW", {"{n:4}"}),
        call("resource", "FindResourceW", {"{n:5}", "RT_STRING"}),
        call("resource", "LoadResource", {"{n:5}"}),
        call("resource", "SizeofResource", {"{n:5}"}),
        call("system", "NtClose", {"0x{n:8}"}),
        call("system", "NtFreeVirtualMemory", {"0x{n:4}0000"}),
        call("system", "LdrGetDllHandle", {"kernel32.dll"}),
        call("system", "LdrGetProcedureAddress", {"kernel32", "GetVersionExW"}),
        call("registry", "RegOpenKeyExW", {"HKEY_CURRENT_USER\\Control Panel\\Desktop"}),
        call("registry", "RegQueryValueExW", {"LogPixels"}),
        call("ole", "CoInitializeEx", {"{n:2}"}),
    };
    return pool;
}

std::vector<FamilyTemplate> builtin_templates() {
    std::vector<FamilyTemplate> t;
    auto family = [&](std::string name, std::vector<CallPattern> pool, std::vector<Motif> motifs) {
        FamilyTemplate f;
        f.class_name = std::move(name);
        f.call_pool = std::move(pool);
        f.chain_motifs = std::move(motifs);
        f.noise_rate = 0.1;
        f.min_motifs = 3;
        f.max_motifs = 6;
        t.push_back(std::move(f));
    };

    family("Adware",
           {call("network", "InternetGetConnectedState"), call("ui", "MessageBoxTimeoutW", {"Special offer {n:4}"}),
            call("network", "ObtainUserAgentString")},
           {{call("network", "InternetOpenA", {"Mozilla/5.0"}),
             call("network", "InternetOpenUrlA", {"http://ads{n:5}.example/banner"}),
             call("network", "InternetReadFile", {"{n:4}096"}), call("network", "InternetCloseHandle")},
            {call("ui", "FindWindowA", {"IEFrame"}), call("process", "ShellExecuteExW", {"iexplore.exe", "http://ads.example/pop"}),
             call("ui", "MessageBoxTimeoutW", {"Special offer {n:4}"})},
            {call("registry", "RegSetValueExA", {"Software\\Microsoft\\Internet Explorer\\Main", "Start Page"}),
             call("network", "InternetOpenA", {"Mozilla/5.0"}), call("network", "HttpOpenRequestA", {"GET", "/track"}),
             call("network", "HttpSendRequestA")}});

    family("Worm",
           {call("network", "GetAdaptersInfo"), call("network", "gethostbyname", {"host{n:8}"}),
            call("netapi", "NetGetJoinInformation")},
           {{call("network", "socket", {"2", "1", "6"}), call("network", "connect", {"10.0.{n:4}.{n:8}", "445"}),
             call("network", "send", {"{n:3}"}), call("network", "closesocket")},
            {call("netapi", "NetShareEnum", {"\\\\host{n:8}"}),
             call("file", "CopyFileW", {"worm.exe", "\\\\host{n:8}\\share\\setup.exe"}),
             call("services", "OpenSCManagerW", {"\\\\host{n:8}"}),
             call("services", "CreateServiceW", {"svchelper"})},
            {call("file", "NtCreateFile", {"E:\\autorun.inf"}), call("file", "NtWriteFile", {"E:\\autorun.inf"}),
             call("file", "CopyFileW", {"worm.exe", "E:\\setup.exe"})}});

    family("Virus",
           {call("file", "GetFileAttributesW", {"C:\\Program Files\\app{n:6}.exe"}), call("file", "SetFileAttributesW", {"128"})},
           {{call("file", "FindFirstFileExW", {"C:\\Program Files\\*.exe"}), call("file", "FindNextFileW"),
             call("file", "NtCreateFile", {"C:\\Program Files\\app{n:6}.exe"}),
             call("file", "NtReadFile", {"C:\\Program Files\\app{n:6}.exe"})},
            {call("system", "NtCreateSection", {"0x{n:4}"}), call("system", "NtMapViewOfSection", {"0x{n:4}"}),
             call("file", "NtWriteFile", {"C:\\Program Files\\app{n:6}.exe"}),
             call("system", "NtUnmapViewOfSection")},
            {call("file", "NtCreateFile", {"C:\\Users\\Public\\LOVE-LETTER-FOR-YOU.TXT.vbs"}),
             call("file", "NtWriteFile", {"C:\\Users\\Public\\LOVE-LETTER-FOR-YOU.TXT.vbs"}),
             call("file", "NtSetInformationFile", {"hidden"})}});

    family("Backdoor",
           {call("system", "NtOpenProcess", {"{n:6}"}), call("registry", "RegQueryValueExA", {"Run"})},
           {{call("network", "socket", {"2", "1", "6"}), call("network", "bind", {"0.0.0.0", "4444"}),
             call("network", "listen"), call("network", "accept")},
            {call("network", "recv", {"{n:3}"}),
             call("process", "CreateProcessInternalW", {"cmd.exe /c whoami"}),
             call("network", "send", {"{n:3}"})},
            {call("registry", "RegCreateKeyExA", {"Software\\Microsoft\\Windows\\CurrentVersion\\Run"}),
             call("registry", "RegSetValueExA", {"Run", "svchost32"}), call("registry", "RegCloseKey")}});

    family("Spyware",
           {call("ui", "GetKeyState", {"{n:8}"}), call("ui", "GetKeyboardState")},
           {{call("ui", "SetWindowsHookExA", {"13"}), call("ui", "GetAsyncKeyState", {"{n:8}"}),
             call("ui", "GetForegroundWindow"), call("file", "NtWriteFile", {"C:\\Users\\Public\\keys.log"})},
            {call("network", "socket", {"2", "1", "6"}), call("network", "connect", {"185.0.0.{n:4}", "443"}),
             call("file", "NtReadFile", {"C:\\Users\\Public\\keys.log"}), call("network", "send", {"{n:3}"})},
            {call("misc", "GetUserNameA"), call("misc", "GetComputerNameA"),
             call("misc", "LookupAccountSidW"), call("network", "HttpSendRequestW", {"POST", "/collect"})}});

    family("Benign",
           {call("ui", "LoadStringW", {"{n:6}"}), call("ui", "DrawTextExW", {"{n:4}"}),
            call("synchronization", "GetSystemTimeAsFileTime")},
           {{call("file", "NtCreateFile", {"C:\\Users\\user\\Documents\\report{n:3}.docx"}),
             call("file", "NtReadFile", {"C:\\Users\\user\\Documents\\report{n:3}.docx"}), call("system", "NtClose", {"0x{n:8}"})},
            {call("registry", "RegOpenKeyExW", {"HKEY_CURRENT_USER\\Control Panel\\Desktop"}),
             call("registry", "RegQueryValueExW", {"LogPixels"}), call("registry", "RegCloseKey")},
            {call("ole", "CoInitializeEx", {"{n:2}"}), call("ole", "CoCreateInstance", {"ShellLink"}),
             call("ui", "LoadStringW", {"{n:6}"}), call("ui", "GetForegroundWindow")}});

    family("Trojan",
           {call("system", "NtProtectVirtualMemory", {"0x{n:4}0000", "64"}), call("misc", "GetUserNameW", {"user{n:3}"})},
           {{call("system", "NtAllocateVirtualMemory"), call("system", "LdrLoadDll", {"ole32", "ole32.dll"}),
             call("system", "LdrGetProcedureAddress", {"ole32", "OleUninitialize"})},
            {call("system", "NtOpenProcess", {"{n:6}"}), call("system", "NtWriteVirtualMemory", {"0x{n:4}0000"}),
             call("system", "NtCreateThreadEx", {"0x{n:4}0000"}), call("system", "NtResumeThread")},
            {call("system", "LdrLoadDll", {"urlmon", "urlmon.dll"}),
             call("network", "URLDownloadToFileW", {"http://cdn{n:4}.example/update.bin", "C:\\Temp\\update.exe"}),
             call("registry", "RegSetValueExA", {"Run", "updater"})}});

    family("Downloader",
           {call("network", "InternetGetConnectedState"), call("file", "GetTempPathW")},
           {{call("system", "LdrLoadDll", {"urlmon", "urlmon.dll"}),
             call("system", "LdrGetProcedureAddress", {"urlmon", "URLDownloadToFileW"}),
             call("network", "URLDownloadToFileW", {"http://dl{n:4}.example/stage2.exe", "C:\\Temp\\stage2.exe"})},
            {call("network", "InternetOpenW", {"Downloader"}),
             call("network", "InternetOpenUrlW", {"http://dl{n:4}.example/payload"}),
             call("network", "InternetReadFile", {"{n:4}096"}),
             call("file", "NtWriteFile", {"C:\\Temp\\payload.exe"})},
            {call("process", "ShellExecuteExW", {"C:\\Temp\\stage2.exe"}),
             call("file", "DeleteFileW", {"C:\\Temp\\dropper.tmp"}), call("system", "NtTerminateProcess")}});

    for (const auto &f : t) f.validate();
    return t;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(seed ^ mix64(index + 0x9E3779B97F4A7C15ull));
}

std::uint64_t family_seed(std::uint64_t corpus_seed, std::string_view class_name) noexcept {
    return mix64(corpus_seed ^ fnv1a32(class_name));
}

std::uint64_t SynthRng::below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = engine_();
        if (x >= threshold) return x % bound;
    }
}

bool SynthRng::chance(double p) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return u < p;
}

std::vector<ApiCallRecord> generate_calls(const FamilyTemplate &family, std::uint64_t sample_seed) {
    SynthRng rng{sample_seed};
    const auto &noise = benign_noise_pool();
    std::vector<ApiCallRecord> calls;
    auto emit = [&](const CallPattern &p) {
        if (family.noise_rate > 0.0 && rng.chance(family.noise_rate)) {
            calls.push_back(instantiate(noise[rng.below(noise.size())], rng));
        }
        calls.push_back(instantiate(p, rng));
    };
    const auto span = static_cast<std::uint64_t>(family.max_motifs - family.min_motifs + 1);
    const auto instances = family.min_motifs + static_cast<int>(rng.below(span));
    for (int m = 0; m < instances; ++m) {
        if (m > 0 && !family.call_pool.empty()) emit(family.call_pool[rng.below(family.call_pool.size())]);
        const Motif &motif = family.chain_motifs[rng.below(family.chain_motifs.size())];
        for (const auto &p : motif) emit(p);
    }
    return calls;
}

std::vector<GeneratedReport> generate(const FamilyTemplate &family, std::size_t count, std::uint64_t seed) {
    family.validate();
    if (count < 1) {
        throw Error{ErrorCode::BadTemplate, family.class_name + ": sample count must be >= 1"};
    }
    std::vector<GeneratedReport> out;
    out.reserve(count);
    const std::string prefix = lowercase(family.class_name);
    for (std::size_t i = 0; i < count; ++i) {
        std::string idx = std::to_string(i);
        if (idx.size() < 4) idx.insert(0, 4 - idx.size(), '0');
        GeneratedReport r;
        r.sample_id = prefix + "_" + idx;
        r.label = family.class_name;
        r.json = report_json(r.sample_id, generate_calls(family, derive_seed(seed, i)));
        out.push_back(std::move(r));
    }
    return out;
}

std::filesystem::path write_corpus(std::span<const FamilyTemplate> families, const CorpusPlan &plan,
                                   const std::filesystem::path &out_dir) {
    const auto reports_dir = out_dir / "reports";
    std::error_code ec;
    std::filesystem::create_directories(reports_dir, ec);
    if (ec) {
        throw Error{ErrorCode::IoError, "cannot create " + reports_dir.string()};
    }
    CorpusManifest manifest;
    const std::size_t per_class = plan.train_per_class + plan.test_per_class;
    for (const auto &f : families) {
        const auto reports = generate(f, per_class, family_seed(plan.seed, f.class_name));
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto path = reports_dir / (reports[i].sample_id + ".json");
            write_file_atomic(path, reports[i].json);
            manifest.entries.push_back(ManifestEntry{path, reports[i].sample_id, reports[i].label,
                                                     i < plan.train_per_class ? Split::Train : Split::Test});
        }
    }
    const auto manifest_path = out_dir / "manifest.csv";
    write_manifest(manifest, manifest_path);
    return manifest_path;
}

}  // namespace callgram
