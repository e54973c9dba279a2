"""Default class definitions and label term lists.

Both tables are keyed by class identity (the label string in the dataset
file), not by display string. The usability definition and the Functional
and Quality term lists come from the original study; everything else was
written for this harness and can be overridden from the config file.
"""

DEFAULT_DEFINITIONS = {
    "Functional": "Functional requirements describe the behavior a system must provide, such as the services, inputs and outputs it supports.",
    "NonFunctional": "Non-functional requirements describe qualities and constraints of a system, such as performance, usability or security, rather than its behavior.",
    "Quality": "Quality requirements describe how well a system performs its functions, covering properties such as performance, efficiency and reliability.",
    "NonQuality": "Non-quality requirements describe features and functions of a system without stating how well they must be performed.",
    "sec": "Security requirements are quality requirements that define how a system must protect its data and services against unauthorized access and attacks.",
    "nonsec": "Non-security requirements are requirements that do not concern the protection of a system against unauthorized access or attacks.",
    "Usability": "Usability requirements are quality requirements that define what a system must do to support users' task performance.",
    "Security": "Security requirements are quality requirements that define how a system must protect its data and services against unauthorized access and attacks.",
    "Operational": "Operational requirements are quality requirements that define the environment and conditions in which a system must operate.",
    "Performance": "Performance requirements are quality requirements that define how fast a system must respond and how much work it must handle.",
    "Look & Feel": "Look and feel requirements are quality requirements that define the appearance and style of a system's interface.",
    "Availability": "Availability requirements are quality requirements that define when and for how long a system must be available for use.",
    "Scalability": "Scalability requirements are quality requirements that define how a system must cope with growth in users, data or load.",
    "Maintainability": "Maintainability requirements are quality requirements that define how easily a system can be modified, corrected and updated.",
    "Legal": "Legal requirements are quality requirements that define the laws, regulations and policies a system must comply with.",
    "Fault Tolerance": "Fault tolerance requirements are quality requirements that define how a system must keep working and recover when failures occur.",
    "Portability": "Portability requirements are quality requirements that define how easily a system can be moved to other platforms and environments.",
}

DEFAULT_LABEL_TERMS = {
    "Functional": ["functional", "system", "behavior", "shall", "must"],
    "Quality": ["quality", "performance", "efficiency", "reliability"],
    "NonFunctional": ["quality", "performance", "usability", "security", "constraint"],
    "NonQuality": ["function", "feature", "input", "output", "display"],
    "sec": ["security", "encrypt", "authentication", "access", "password", "attack"],
    "nonsec": ["feature", "display", "report", "interface", "data"],
    "Usability": ["usability", "ease", "user", "learn", "intuitive"],
    "Security": ["security", "encrypt", "authorized", "access", "password"],
    "Operational": ["operational", "environment", "operate", "install", "platform"],
    "Performance": ["performance", "response", "seconds", "speed", "throughput"],
    "Look & Feel": ["look", "feel", "appearance", "color", "style"],
    "Availability": ["availability", "available", "uptime", "hours", "downtime"],
    "Scalability": ["scalability", "scale", "concurrent", "growth", "load"],
    "Maintainability": ["maintainability", "maintain", "update", "modify", "modular"],
    "Legal": ["legal", "law", "regulation", "compliance", "policy"],
    "Fault Tolerance": ["fault", "tolerance", "failure", "recover", "backup"],
    "Portability": ["portability", "portable", "port", "platforms", "migrate"],
}
